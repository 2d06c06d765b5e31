#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcprod/core_stats.hpp"
#include "mcprod/covariation.hpp"
#include "mcprod/latent_trait.hpp"

namespace mcprod {

// Marginal likelihood estimators from posterior draws and an importance
// density g, all in log space:
//   RM: 1 / mean_post[g / (f pi)]
//   BH: mean_g[1 / g] / mean_post[1 / (f pi)]
//   BG: mean_g[sqrt(f pi / g)] / mean_post[sqrt(g / (f pi))]

enum class Estimator { rm, bh, bg };

std::string to_string(Estimator e);
std::string to_string(Approach a);

/// Per-draw log f(Y|.) + log pi(.) and log g(.) at the posterior draws and at
/// an equally sized sample from g.
struct BmlInputs {
  std::vector<double> post_log_target;
  std::vector<double> post_log_g;
  std::vector<double> gdraw_log_target;
  std::vector<double> gdraw_log_g;

  std::size_t size() const { return post_log_target.size(); }
  /// Throws NumericalError naming the first non-finite entry.
  void validate(bool needs_gdraws) const;
};

struct BatchScheme {
  std::int64_t count = 25;
  std::int64_t size = 0;  // 0: floor(draws / count)
  bool shuffled = false;
  std::uint64_t shuffle_seed = 0;
};

struct BmlRun {
  Estimator estimator = Estimator::rm;
  Approach approach = Approach::joint;
  /// Estimate over the union of all batches.
  EstimateReport pooled;
  std::vector<double> batch_log_estimates;
  double batch_mean = 0.0;
  /// Standard deviation of batch log estimates; NaN with a single batch.
  double mce = 0.0;
  bool mce_flagged = false;
};

/// Log estimate over the draws at `indices`.
double bml_log_estimate(Estimator estimator, const BmlInputs& in, const std::vector<std::size_t>& indices);

BmlRun run_estimator(Estimator estimator, Approach approach, const BmlInputs& in, const BatchScheme& scheme);
BmlRun rm_estimate(const BmlInputs& in, Approach approach, const BatchScheme& scheme);
BmlRun bh_estimate(const BmlInputs& in, Approach approach, const BatchScheme& scheme);
BmlRun bg_estimate(const BmlInputs& in, Approach approach, const BatchScheme& scheme);

struct BatchReportRow {
  std::string approach;
  std::string estimator;
  double pooled_log_estimate = 0.0;
  double batch_mean = 0.0;
  double mce = 0.0;
  bool mce_defined = true;
};

BatchReportRow batch_report(const BmlRun& run);

/// Per-case pieces of a joint-mode target, for one set of draws:
/// case_log_target(r, i) = log f(y_i | theta_r, z_ri) + log pi(z_ri),
/// case_log_g(r, i) = log g(z_ri), plus the theta parts per draw.
struct CaseTerms {
  std::size_t draws = 0;
  std::size_t cases = 0;
  std::vector<double> case_log_target;  // draws x cases
  std::vector<double> case_log_g;
  std::vector<double> theta_log_prior;  // per draw
  std::vector<double> theta_log_g;
};

struct IntegrandBlocks {
  SampleBlock numerator;
  std::optional<SampleBlock> denominator;
};

/// R x N_cases blocks of the averaged variables whose row products are the
/// estimator summands: the theta part is spread evenly as a 1/N power over
/// the cases. RM uses the posterior terms only; BH and BG take the numerator
/// from the g-sample and the denominator from the posterior.
IntegrandBlocks joint_integrand_blocks(Estimator estimator, Approach approach, const CaseTerms& posterior,
                                       const CaseTerms* gsample);

struct IntegrandDiagnostics {
  TciDiagnostics tci;
  /// Median over cases of the per-column CV, numerator and denominator.
  double numerator_median_cv = 0.0;
  std::optional<double> denominator_median_cv;
};

IntegrandDiagnostics integrand_diagnostics(const IntegrandBlocks& blocks);

/// Batch order for `draws` draws: identity, or a seeded shuffle.
std::vector<std::size_t> batch_order(std::size_t draws, const BatchScheme& scheme);

}  // namespace mcprod
