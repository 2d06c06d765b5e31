#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace mcprod {

/// A real number stored as sign and log-magnitude. Zero is sign 0 with
/// log_abs = -inf.
struct SignedLog {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;

  bool is_zero() const { return sign == 0; }
  bool is_positive() const { return sign > 0; }
  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

  static SignedLog from_value(double x);
  static SignedLog from_log(double log_abs) { return {log_abs, std::isinf(log_abs) && log_abs < 0 ? 0 : 1}; }
};

SignedLog operator*(SignedLog a, SignedLog b);
SignedLog operator-(SignedLog a, SignedLog b);
SignedLog operator+(SignedLog a, SignedLog b);

/// log(sum exp(x)). Returns -inf for an empty span or all -inf inputs.
double log_sum_exp(std::span<const double> logs);
double log_mean_exp(std::span<const double> logs);

/// Signed sum: sum_j signs[j] * exp(log_abs[j]).
SignedLog signed_log_sum_exp(std::span<const double> log_abs, std::span<const int> signs);

}  // namespace mcprod
