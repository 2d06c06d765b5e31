#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mcprod/bml.hpp"
#include "mcprod/gaussian.hpp"

namespace mcprod {

/// Normal-normal model with a closed-form evidence:
///   y_i = theta + z_i + e_i,  theta ~ N(mu0, s0^2), z_i ~ N(0, tau^2), e_i ~ N(0, sigma^2).
/// The joint parameter is (theta, z_1..z_n); the marginal one is theta alone
/// with y_i | theta ~ N(theta, sigma^2 + tau^2).
struct ConjugateModel {
  std::vector<double> y;
  double mu0 = 0.0;
  double s0 = 1.0;
  double tau = 1.0;
  double sigma = 1.0;

  std::size_t cases() const { return y.size(); }
  void validate() const;

  double log_evidence() const;
  /// log f(Y | .) + log pi(.) at x = (theta, z...) or x = (theta).
  double log_target(Approach approach, std::span<const double> x) const;
  MultivariateNormal posterior(Approach approach) const;

  /// y drawn from the model's own prior predictive.
  static ConjugateModel simulate(std::size_t cases, double mu0, double s0, double tau, double sigma,
                                 std::uint64_t seed);
};

enum class ImportanceChoice { fitted, exact_posterior };

/// R exact posterior draws, g fitted to them (full-covariance normal) or set
/// to the exact posterior, and an equally sized g-sample.
BmlInputs conjugate_bml_inputs(const ConjugateModel& model, Approach approach, std::size_t draws,
                               ImportanceChoice choice, Stream& stream);

}  // namespace mcprod
