#include "mcprod/product_mc.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcprod/error.hpp"

namespace mcprod {

namespace {

void check_replications(std::int64_t r, const char* where) {
  if (r < 1) throw InputError(std::string(where) + ": R must be >= 1");
}

}  // namespace

SignedLog joint_estimate(const SampleBlock& block) {
  const std::size_t rows = block.rows();
  std::vector<double> log_abs(rows);
  std::vector<int> signs(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double l = 0.0;
    int s = 1;
    for (double x : block.row(r)) {
      if (x == 0.0) {
        s = 0;
        break;
      }
      if (x < 0.0) s = -s;
      l += std::log(std::fabs(x));
    }
    log_abs[r] = s == 0 ? -std::numeric_limits<double>::infinity() : l;
    signs[r] = s;
  }
  SignedLog total = signed_log_sum_exp(log_abs, signs);
  if (!total.is_zero()) total.log_abs -= std::log(static_cast<double>(rows));
  return total;
}

SignedLog marginal_estimate(const SampleBlock& block) {
  const std::size_t n = block.cols();
  std::vector<double> sums(n, 0.0);
  for (std::size_t r = 0; r < block.rows(); ++r) {
    auto row = block.row(r);
    for (std::size_t c = 0; c < n; ++c) sums[c] += row[c];
  }
  const double log_r = std::log(static_cast<double>(block.rows()));
  SignedLog out{0.0, 1};
  for (double s : sums) {
    if (s == 0.0) return {};
    out.log_abs += std::log(std::fabs(s)) - log_r;
    if (s < 0.0) out.sign = -out.sign;
  }
  return out;
}

double product_excess(std::span<const double> a, std::span<const double> b) {
  // D_n = (a_n + b_n) D_{n-1} + a_n prod_{i<n} b_i, every term nonnegative.
  double excess = 0.0;
  double base = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    excess = (a[i] + b[i]) * excess + a[i] * base;
    base *= b[i];
  }
  return excess;
}

double goodman_product_variance(const MomentSummary& m) {
  std::vector<double> e2(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) e2[i] = m.mean[i] * m.mean[i];
  return product_excess(m.variance, e2);
}

double goodman_subset_sum(const MomentSummary& m) {
  const std::size_t n = m.size();
  if (n > 12) throw InputError("goodman_subset_sum: subset enumeration is capped at N = 12");
  double total = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    double term = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      term *= (mask >> i & 1u) ? m.variance[i] : m.mean[i] * m.mean[i];
    total += term;
  }
  return total;
}

std::vector<double> order_sums(const MomentSummary& m) {
  const std::size_t n = m.size();
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e2 = m.mean[i] * m.mean[i];
    for (std::size_t k = i + 1; k >= 1; --k) c[k] = c[k] * e2 + c[k - 1] * m.variance[i];
    c[0] *= e2;
  }
  return {c.begin() + 1, c.end()};
}

VarianceBreakdown estimator_variances(const MomentSummary& m, std::int64_t replications) {
  check_replications(replications, "estimator_variances");
  const double r = static_cast<double>(replications);
  const std::size_t n = m.size();

  VarianceBreakdown out;
  out.var_joint = goodman_product_variance(m) / r;

  std::vector<double> damped(n), e2(n);
  for (std::size_t i = 0; i < n; ++i) {
    damped[i] = m.variance[i] / r;
    e2[i] = m.mean[i] * m.mean[i];
  }
  out.var_marginal = product_excess(damped, e2);

  const auto s = order_sums(m);
  out.first_order_term = s[0] / r;
  out.higher_order_terms.assign(s.begin() + 1, s.end());
  out.difference = variance_difference(m, replications);
  return out;
}

double variance_cv_form(const MomentSummary& m, std::int64_t replications, EstimatorKind which) {
  check_replications(replications, "variance_cv_form");
  const double r = static_cast<double>(replications);
  const std::size_t n = m.size();
  const std::size_t n0 = m.zero_mean_count();

  double zero_part = 1.0;  // prod over zero-mean factors of V_i
  double mean_part = 1.0;  // prod over the rest of E_i^2
  std::vector<double> cv2;
  cv2.reserve(n - n0);
  for (std::size_t i = 0; i < n; ++i) {
    if (m.is_zero_mean(i)) {
      zero_part *= m.variance[i];
    } else {
      mean_part *= m.mean[i] * m.mean[i];
      cv2.push_back(m.cv[i] * m.cv[i]);
    }
  }
  const double scale = which == EstimatorKind::joint ? 1.0 : 1.0 / r;
  for (double& c : cv2) c *= scale;

  // prod (CV^2 * scale + 1) - I(no zero-mean factor)
  double bracket;
  if (n0 == 0) {
    std::vector<double> ones(cv2.size(), 1.0);
    bracket = product_excess(cv2, ones);
  } else {
    bracket = 1.0;
    for (double c : cv2) bracket *= c + 1.0;
  }
  const double leading = which == EstimatorKind::joint ? 1.0 / r : std::pow(r, -static_cast<double>(n0));
  return leading * zero_part * mean_part * bracket;
}

double variance_difference(const MomentSummary& m, std::int64_t replications) {
  check_replications(replications, "variance_difference");
  const double r = static_cast<double>(replications);
  const auto s = order_sums(m);
  double total = 0.0;
  for (std::size_t k = 2; k <= s.size(); ++k)
    total += -std::expm1(-(static_cast<double>(k) - 1.0) * std::log(r)) * s[k - 1];
  return total / r;
}

double required_iterations(std::int64_t marginal_replications, const MomentSummary& m) {
  if (marginal_replications < 2) throw InputError("required_iterations: R_M must be >= 2");
  const double rm = static_cast<double>(marginal_replications);
  const std::size_t n = m.size();
  const std::size_t n0 = m.zero_mean_count();

  bool all_zero_variance = true;
  for (double v : m.variance) all_zero_variance = all_zero_variance && v == 0.0;
  double zero_set_variance = 1.0;
  for (std::size_t i : m.zero_mean_set) zero_set_variance *= m.variance[i];
  if (all_zero_variance || zero_set_variance == 0.0) throw NumericalError("required_iterations: both variances zero");

  double omega;
  if (n0 == n) {
    omega = std::pow(rm, static_cast<double>(n - n0));
  } else if (n0 == 0) {
    std::vector<double> cv2(n), cv2_damped(n), ones(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      cv2[i] = m.cv[i] * m.cv[i];
      cv2_damped[i] = cv2[i] / rm;
    }
    omega = product_excess(cv2, ones) / product_excess(cv2_damped, ones);
  } else {
    omega = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (m.is_zero_mean(i)) continue;
      const double c2 = m.cv[i] * m.cv[i];
      omega *= (c2 + 1.0) / (c2 / rm + 1.0);
    }
  }
  return std::pow(rm, static_cast<double>(n0)) * omega;
}

}  // namespace mcprod
