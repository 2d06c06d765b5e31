#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcprod/signed_log.hpp"

namespace mcprod {

/// R x N matrix of evaluated integrand factors: row r holds
/// phi_1(y_1^(r)), ..., phi_N(y_N^(r)). Row-major, immutable.
class SampleBlock {
 public:
  SampleBlock(std::size_t rows, std::size_t cols, std::vector<double> values);
  static SampleBlock from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> values() const { return values_; }
  std::vector<double> column(std::size_t c) const;

  /// Rows [begin, end) as a new block.
  SampleBlock slice_rows(std::size_t begin, std::size_t end) const;
  /// Rows picked by index, in the given order.
  SampleBlock gather_rows(std::span<const std::size_t> indices) const;
  /// Columns [begin, end) as a new block.
  SampleBlock slice_cols(std::size_t begin, std::size_t end) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// Per-column means and variances with the zero-mean index set.
///
/// `variance` uses divisor R so the covariation identities hold exactly on
/// samples. `cv[i]` is NaN for i in the zero-mean set.
struct MomentSummary {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> cv;
  std::vector<std::size_t> zero_mean_set;
  double zero_tol = 0.0;

  std::size_t size() const { return mean.size(); }
  bool is_zero_mean(std::size_t i) const;
  std::size_t zero_mean_count() const { return zero_mean_set.size(); }

  /// Build from known (population) moments.
  static MomentSummary from_moments(std::vector<double> mean, std::vector<double> variance,
                                    double zero_tol = 0.0);
};

inline constexpr double kDefaultRelativeZeroTol = 1e-12;

/// Column moments with an absolute zero tolerance: i is in the zero-mean set
/// iff |E_i| <= zero_tol.
MomentSummary moments(const SampleBlock& block, double zero_tol);
/// Column moments with zero_tol = 1e-12 * max_i |E_i|.
MomentSummary moments(const SampleBlock& block);

/// Divisor R-1 column variances, for reporting only.
std::vector<double> unbiased_variances(const SampleBlock& block);

/// Standard deviation (divisor B-1) of per-batch log estimates.
double batch_mce(std::span<const double> batch_log_estimates);

/// A point estimate kept in log space plus its batch-means Monte Carlo error.
struct EstimateReport {
  double log_estimate = 0.0;
  int sign = 1;
  /// Standard deviation across batches. On the log scale when every batch
  /// estimate is positive, otherwise on the linear scale. NaN if fewer than
  /// two batches were available.
  double mce = 0.0;
  bool mce_on_log_scale = true;
  std::string method;
  std::int64_t r_used = 0;
  std::int64_t batches = 0;

  bool mce_defined() const;
  double value() const { return SignedLog{log_estimate, sign}.value(); }
};

}  // namespace mcprod
