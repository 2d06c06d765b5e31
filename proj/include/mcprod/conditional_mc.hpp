#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mcprod/core_stats.hpp"
#include "mcprod/random.hpp"

namespace mcprod {

/// Hierarchical integrand prod_i phi_i(u_i, v) with u_1..u_N conditionally
/// independent given v.
struct HierarchicalModel {
  std::size_t factors = 0;
  std::size_t outer_dim = 1;  // length of v
  std::size_t inner_dim = 1;  // length of each u_i

  /// Draws v ~ h(v) into `v`.
  std::function<void(Stream&, std::span<double> v)> outer_sampler;
  /// Draws u_i ~ h(u_i | v) into `u`.
  std::function<void(std::size_t i, std::span<const double> v, Stream&, std::span<double> u)> inner_sampler;
  /// phi_i(u_i, v); must be deterministic.
  std::function<double(std::size_t i, std::span<const double> u, std::span<const double> v)> phi;

  /// Optional analytic E(phi_i | v) and V(phi_i | v).
  std::function<double(std::size_t i, std::span<const double> v)> cond_mean;
  std::function<double(std::size_t i, std::span<const double> v)> cond_var;

  bool has_analytic_moments() const { return static_cast<bool>(cond_mean) && static_cast<bool>(cond_var); }
};

/// Gaussian test hierarchy: v ~ N(outer_mean, outer_sd^2),
/// u_i | v ~ N(v + offset_i, inner_sd^2), phi_i = u_i.
HierarchicalModel gaussian_hierarchy(std::vector<double> offsets, double outer_mean = 0.0,
                                     double outer_sd = 1.0, double inner_sd = 1.0);

inline constexpr std::int64_t kDefaultReportBatches = 10;

/// Joint estimator: R joint draws (u, v), average of prod_i phi_i.
EstimateReport nested_joint(const HierarchicalModel& model, std::int64_t replications, Stream& stream,
                            std::int64_t batches = kDefaultReportBatches);

/// Nested marginal estimator with R1 outer draws and R2 inner draws per factor.
/// R2 = 0 substitutes the analytic E(phi_i | v) and needs cond_mean.
EstimateReport nested_marginal(const HierarchicalModel& model, std::int64_t outer_replications,
                               std::int64_t inner_replications, Stream& stream,
                               std::int64_t batches = kDefaultReportBatches);

/// Point value only; the replicate experiments call these in tight loops.
double nested_joint_value(const HierarchicalModel& model, std::int64_t replications, Stream& stream);
double nested_marginal_value(const HierarchicalModel& model, std::int64_t outer_replications,
                             std::int64_t inner_replications, Stream& stream);

enum class CondVarianceMethod { cv_form, enumeration };

struct CondVariances {
  double var_joint = 0.0;
  double var_marginal = 0.0;
  /// Var_v[prod_i E(phi_i | v)], plug-in with divisor equal to the v sample size.
  double common_term = 0.0;
  /// E_v[ sum_k sum_C prod_C V(phi|v) prod_rest E(phi|v)^2 ]
  double joint_inner_term = 0.0;
  /// Same with each k-subset damped by R2^k (zero when R2 = 0).
  double marginal_inner_term = 0.0;
  /// Monte Carlo error of the outer average of the inner terms.
  double joint_inner_term_mce = 0.0;
};

struct CondVarianceOptions {
  std::int64_t joint_replications = 1;
  std::int64_t outer_replications = 1;
  /// 0 means the analytic inner-mean path (marginal inner term vanishes).
  std::int64_t inner_replications = 0;
  std::size_t v_sample_size = 100000;
  CondVarianceMethod method = CondVarianceMethod::cv_form;
  /// Inner draws used to estimate conditional moments when the model has no
  /// analytic ones.
  std::size_t moment_draws = 10000;
};

inline constexpr std::size_t kMaxEnumerationFactors = 12;

CondVariances cond_variance_formulas(const HierarchicalModel& model, const CondVarianceOptions& options,
                                     Stream& stream);

struct CvSummary {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t used = 0;
  /// (factor, v) pairs with zero conditional mean, excluded from the summary.
  std::size_t flagged = 0;
};

/// Per-factor summaries over the v draws of CV(phi_i | v). Uses analytic
/// moments when present, otherwise `moment_draws` inner draws per (i, v).
std::vector<CvSummary> cond_cv_diagnostics(const HierarchicalModel& model,
                                           const std::vector<std::vector<double>>& v_draws, Stream& stream,
                                           std::size_t moment_draws = 1000);

}  // namespace mcprod
