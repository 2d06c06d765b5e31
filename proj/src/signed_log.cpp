#include "mcprod/signed_log.hpp"

#include <algorithm>

namespace mcprod {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

SignedLog SignedLog::from_value(double x) {
  if (x == 0.0) return {};
  return {std::log(std::fabs(x)), x > 0 ? 1 : -1};
}

SignedLog operator*(SignedLog a, SignedLog b) {
  if (a.is_zero() || b.is_zero()) return {};
  return {a.log_abs + b.log_abs, a.sign * b.sign};
}

SignedLog operator+(SignedLog a, SignedLog b) {
  const double logs[2] = {a.log_abs, b.log_abs};
  const int signs[2] = {a.sign, b.sign};
  return signed_log_sum_exp(logs, signs);
}

SignedLog operator-(SignedLog a, SignedLog b) {
  b.sign = -b.sign;
  return a + b;
}

double log_sum_exp(std::span<const double> logs) {
  double m = kNegInf;
  for (double x : logs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : logs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_mean_exp(std::span<const double> logs) {
  if (logs.empty()) return kNegInf;
  return log_sum_exp(logs) - std::log(static_cast<double>(logs.size()));
}

SignedLog signed_log_sum_exp(std::span<const double> log_abs, std::span<const int> signs) {
  double m = kNegInf;
  for (std::size_t j = 0; j < log_abs.size(); ++j)
    if (signs[j] != 0) m = std::max(m, log_abs[j]);
  if (m == kNegInf) return {};
  if (std::isinf(m)) return {m, 1};
  double s = 0.0;
  for (std::size_t j = 0; j < log_abs.size(); ++j)
    if (signs[j] != 0) s += signs[j] * std::exp(log_abs[j] - m);
  if (s == 0.0) return {};
  return {m + std::log(std::fabs(s)), s > 0 ? 1 : -1};
}

}  // namespace mcprod
