#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mcprod {

/// Quadrature rule for expectations under a standard normal (probabilists'
/// normalization: weights already include the density and sum to one).
/// Points are stored row-major, `dimension` coordinates each.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
  int dimension = 1;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t j) const {
    return {nodes.data() + j * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension)};
  }
};

inline constexpr int kMaxHermiteOrder = 100;
inline constexpr std::size_t kMaxTensorPoints = 1'000'000;
inline constexpr int kDefaultLatentQuadratureOrder = 21;

/// Gauss-Hermite rule of the given order (1..100), exact for polynomials of
/// degree <= 2*order-1 under N(0, 1).
QuadratureRule gauss_hermite(int order);

/// Full tensor product of a one-dimensional rule, for N(0, I_k).
QuadratureRule tensor_rule(const QuadratureRule& base, int k);

using PointFunction = std::function<double(std::span<const double>)>;

/// sum_j w_j f(x_j). Throws NumericalError naming the node if f is non-finite.
double expect(const QuadratureRule& rule, const PointFunction& f);

/// log sum_j w_j exp(log_f(x_j)), for positive integrands given in log form.
double log_expect(const QuadratureRule& rule, const PointFunction& log_f);

}  // namespace mcprod
