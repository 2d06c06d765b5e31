#include "mcprod/core_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcprod/error.hpp"

namespace mcprod {

SampleBlock::SampleBlock(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) throw InputError("SampleBlock: need at least one row and one column");
  if (values_.size() != rows_ * cols_) throw InputError("SampleBlock: value count does not match R x N");
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_[j])) {
      throw InputError("SampleBlock: non-finite entry at row " + std::to_string(j / cols_) +
                       ", column " + std::to_string(j % cols_));
    }
  }
}

SampleBlock SampleBlock::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InputError("SampleBlock: need at least one row");
  const std::size_t n = rows.front().size();
  std::vector<double> v;
  v.reserve(rows.size() * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw InputError("SampleBlock: ragged rows");
    v.insert(v.end(), r.begin(), r.end());
  }
  return SampleBlock(rows.size(), n, std::move(v));
}

std::vector<double> SampleBlock::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

SampleBlock SampleBlock::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > rows_) throw InputError("SampleBlock: bad row range");
  return SampleBlock(end - begin, cols_,
                     std::vector<double>(values_.begin() + begin * cols_, values_.begin() + end * cols_));
}

SampleBlock SampleBlock::gather_rows(std::span<const std::size_t> indices) const {
  std::vector<double> v;
  v.reserve(indices.size() * cols_);
  for (std::size_t r : indices) {
    if (r >= rows_) throw InputError("SampleBlock: row index out of range");
    auto src = row(r);
    v.insert(v.end(), src.begin(), src.end());
  }
  return SampleBlock(indices.size(), cols_, std::move(v));
}

SampleBlock SampleBlock::slice_cols(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > cols_) throw InputError("SampleBlock: bad column range");
  std::vector<double> v;
  v.reserve(rows_ * (end - begin));
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = begin; c < end; ++c) v.push_back((*this)(r, c));
  return SampleBlock(rows_, end - begin, std::move(v));
}

bool MomentSummary::is_zero_mean(std::size_t i) const {
  return std::find(zero_mean_set.begin(), zero_mean_set.end(), i) != zero_mean_set.end();
}

MomentSummary MomentSummary::from_moments(std::vector<double> mean, std::vector<double> variance,
                                          double zero_tol) {
  if (mean.size() != variance.size() || mean.empty())
    throw InputError("MomentSummary: mean and variance must have equal, nonzero length");
  if (!(zero_tol >= 0.0)) throw InputError("MomentSummary: zero_tol must be nonnegative");
  MomentSummary m;
  m.zero_tol = zero_tol;
  m.cv.assign(mean.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!std::isfinite(mean[i]) || !std::isfinite(variance[i]))
      throw InputError("MomentSummary: non-finite moment at index " + std::to_string(i));
    if (variance[i] < 0.0) throw InputError("MomentSummary: negative variance at index " + std::to_string(i));
    if (std::fabs(mean[i]) <= zero_tol) {
      m.zero_mean_set.push_back(i);
    } else {
      m.cv[i] = std::sqrt(variance[i]) / std::fabs(mean[i]);
    }
  }
  m.mean = std::move(mean);
  m.variance = std::move(variance);
  return m;
}

namespace {

void column_moments(const SampleBlock& block, std::vector<double>& mean, std::vector<double>& ss) {
  const std::size_t n = block.cols();
  const double r_count = static_cast<double>(block.rows());
  mean.assign(n, 0.0);
  ss.assign(n, 0.0);
  for (std::size_t r = 0; r < block.rows(); ++r) {
    auto row = block.row(r);
    for (std::size_t c = 0; c < n; ++c) mean[c] += row[c];
  }
  for (double& e : mean) e /= r_count;
  for (std::size_t r = 0; r < block.rows(); ++r) {
    auto row = block.row(r);
    for (std::size_t c = 0; c < n; ++c) {
      const double d = row[c] - mean[c];
      ss[c] += d * d;
    }
  }
}

}  // namespace

MomentSummary moments(const SampleBlock& block, double zero_tol) {
  if (!(zero_tol >= 0.0)) throw InputError("moments: zero_tol must be nonnegative");
  std::vector<double> mean, ss;
  column_moments(block, mean, ss);
  const double r_count = static_cast<double>(block.rows());
  for (double& s : ss) s /= r_count;
  return MomentSummary::from_moments(std::move(mean), std::move(ss), zero_tol);
}

MomentSummary moments(const SampleBlock& block) {
  std::vector<double> mean, ss;
  column_moments(block, mean, ss);
  double scale = 0.0;
  for (double e : mean) scale = std::max(scale, std::fabs(e));
  const double r_count = static_cast<double>(block.rows());
  for (double& s : ss) s /= r_count;
  return MomentSummary::from_moments(std::move(mean), std::move(ss), kDefaultRelativeZeroTol * scale);
}

std::vector<double> unbiased_variances(const SampleBlock& block) {
  if (block.rows() < 2) throw InputError("unbiased_variances: need at least two rows");
  std::vector<double> mean, ss;
  column_moments(block, mean, ss);
  for (double& s : ss) s /= static_cast<double>(block.rows() - 1);
  return ss;
}

double batch_mce(std::span<const double> batch_log_estimates) {
  const std::size_t b = batch_log_estimates.size();
  if (b < 2) throw InputError("batch_mce: need at least two batches");
  double mean = 0.0;
  for (double x : batch_log_estimates) {
    if (!std::isfinite(x)) throw InputError("batch_mce: non-finite batch estimate");
    mean += x;
  }
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double x : batch_log_estimates) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(b - 1));
}

bool EstimateReport::mce_defined() const { return std::isfinite(mce); }

}  // namespace mcprod
