#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcprod/bml.hpp"
#include "mcprod/latent_trait.hpp"

namespace mcprod {

/// Shortest round-trip text for a double ("nan", "inf", "-inf" for specials).
std::string format_double(double x);

/// "start:stop:step" -> start, start+step, ..., <= stop.
std::vector<std::int64_t> parse_schedule(const std::string& text);

struct BetaProductConfig {
  double lambda1 = 1.0;
  double lambda2 = 2.0;
  std::int64_t factors = 10;
  std::vector<std::int64_t> r_schedule{250000};
  std::int64_t batches = 25;
  /// 0: floor(R / batches) for every R.
  std::int64_t batch_size = 0;
  /// Replicate r runs with seed + r.
  std::int64_t replicates = 1;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

struct BetaProductRow {
  std::uint64_t seed = 0;
  std::int64_t factors = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::int64_t r = 0;
  double log_truth = 0.0;
  double log_joint = 0.0;
  double log_marginal = 0.0;
  double mce_joint = 0.0;
  double mce_marginal = 0.0;
  double tci = 0.0;
};

/// N * log(lambda1 / (lambda1 + lambda2)).
double beta_product_log_truth(double lambda1, double lambda2, std::int64_t factors);

/// Every R in the schedule is evaluated on the leading R rows of one stream
/// of draws per replicate, so the rows trace a single growing sample.
std::vector<BetaProductRow> beta_product_experiment(const BetaProductConfig& config);
void write_beta_product_csv(std::ostream& out, const std::vector<BetaProductRow>& rows);

struct GllvmConfig {
  ModelConfig model;
  McmcSettings mcmc;
  std::int64_t batches = 25;
  std::int64_t batch_size = 0;
  int quad_order = 21;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Optional dataset to use instead of simulating one.
  std::optional<Dataset> data;

  void validate() const;
};

struct GllvmDiagnostic {
  std::string section;
  std::string estimator;
  std::string block;
  std::string statistic;
  double value = 0.0;
};

struct GllvmResult {
  Dataset data;
  std::optional<ItemParams> true_params;
  PosteriorDraws draws;
  /// RM, BH, BG joint, then RM, BH, BG marginal.
  std::vector<BmlRun> runs;
  std::vector<GllvmDiagnostic> diagnostics;

  const BmlRun& run(Estimator e, Approach a) const;
};

GllvmResult gllvm_experiment(const GllvmConfig& config);
/// One row per (approach, estimator, batch).
void write_gllvm_csv(std::ostream& out, const GllvmResult& result);
/// Long format: section, estimator, block, statistic, value.
void write_gllvm_diagnostics_csv(std::ostream& out, const GllvmResult& result);

}  // namespace mcprod
