#include "mcprod/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcprod/error.hpp"

namespace mcprod {

namespace {

// Orthonormal probabilists' Hermite values p_{n}(x) and p_{n-1}(x), with
// p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
void orthonormal_hermite(int n, double x, double& pn, double& pn1) {
  double prev = 0.0, cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
  }
  pn = cur;
  pn1 = prev;
}

}  // namespace

QuadratureRule gauss_hermite(int order) {
  if (order < 1 || order > kMaxHermiteOrder)
    throw InputError("gauss_hermite: order must be in [1, " + std::to_string(kMaxHermiteOrder) + "]");

  QuadratureRule rule;
  rule.order = order;
  rule.dimension = 1;
  if (order == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }

  // Golub-Welsch: eigenvalues of the Jacobi matrix give the nodes.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  std::vector<double> x(solver.eigenvalues().data(), solver.eigenvalues().data() + order);
  std::sort(x.begin(), x.end());

  // Newton polish on p_n, then w = 1 / (n p_{n-1}(x)^2), which keeps full
  // relative accuracy in the tails where eigenvector weights do not.
  std::vector<double> w(order);
  for (int j = 0; j < order; ++j) {
    double pn = 0.0, pn1 = 0.0;
    for (int it = 0; it < 4; ++it) {
      orthonormal_hermite(order, x[j], pn, pn1);
      const double step = pn / (std::sqrt(static_cast<double>(order)) * pn1);
      x[j] -= step;
      if (std::fabs(step) <= 1e-16 * std::max(1.0, std::fabs(x[j]))) break;
    }
    orthonormal_hermite(order, x[j], pn, pn1);
    w[j] = 1.0 / (order * pn1 * pn1);
  }

  // Enforce exact symmetry.
  for (int j = 0; j < order / 2; ++j) {
    const int m = order - 1 - j;
    const double node = 0.5 * (x[m] - x[j]);
    const double weight = 0.5 * (w[j] + w[m]);
    x[j] = -node;
    x[m] = node;
    w[j] = w[m] = weight;
  }
  if (order % 2 == 1) x[order / 2] = 0.0;

  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;

  rule.nodes = std::move(x);
  rule.weights = std::move(w);
  return rule;
}

QuadratureRule tensor_rule(const QuadratureRule& base, int k) {
  if (k < 1) throw InputError("tensor_rule: k must be >= 1");
  if (base.dimension != 1) throw InputError("tensor_rule: base rule must be one-dimensional");
  const std::size_t m = base.size();
  double points = std::pow(static_cast<double>(m), k);
  if (points > static_cast<double>(kMaxTensorPoints))
    throw InputError("tensor_rule: order^k = " + std::to_string(static_cast<long long>(points)) +
                     " exceeds the grid limit");
  if (k == 1) return base;

  const std::size_t count = static_cast<std::size_t>(points);
  QuadratureRule rule;
  rule.order = base.order;
  rule.dimension = k;
  rule.nodes.resize(count * static_cast<std::size_t>(k));
  rule.weights.resize(count);
  std::vector<std::size_t> digit(static_cast<std::size_t>(k), 0);
  for (std::size_t p = 0; p < count; ++p) {
    double w = 1.0;
    for (int d = 0; d < k; ++d) {
      rule.nodes[p * k + d] = base.nodes[digit[d]];
      w *= base.weights[digit[d]];
    }
    rule.weights[p] = w;
    for (int d = k - 1; d >= 0; --d) {
      if (++digit[d] < m) break;
      digit[d] = 0;
    }
  }
  return rule;
}

double expect(const QuadratureRule& rule, const PointFunction& f) {
  double total = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double v = f(rule.point(j));
    if (!std::isfinite(v)) throw NumericalError("expect: integrand is not finite at node " + std::to_string(j));
    total += rule.weights[j] * v;
  }
  return total;
}

double log_expect(const QuadratureRule& rule, const PointFunction& log_f) {
  std::vector<double> terms(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double v = log_f(rule.point(j));
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw NumericalError("log_expect: log-integrand is not finite at node " + std::to_string(j));
    terms[j] = std::log(rule.weights[j]) + v;
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

}  // namespace mcprod
