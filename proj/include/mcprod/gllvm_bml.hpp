#pragma once

#include <Eigen/Core>
#include <optional>

#include "mcprod/bml.hpp"
#include "mcprod/latent_trait.hpp"
#include "mcprod/quadrature.hpp"

namespace mcprod {

/// Draws from an importance function, laid out like PosteriorDraws
/// (z is empty when g has no latent block).
struct ImportanceSample {
  Eigen::MatrixXd theta;
  Eigen::MatrixXd z;
  std::size_t size() const { return static_cast<std::size_t>(theta.rows()); }
};

ImportanceSample sample_importance(const ImportanceFn& g, std::size_t count, Stream& stream);

struct GllvmEvaluation {
  BmlInputs inputs;
  /// Joint mode only: per-case terms at the posterior draws and the g-sample.
  std::optional<CaseTerms> posterior_terms;
  std::optional<CaseTerms> gsample_terms;
};

/// Log target and log g at every posterior draw and g-draw. The joint target
/// is log f(Y|theta,Z) + log pi(theta) + log pi(Z); the marginal one replaces
/// the first term by the quadrature marginal likelihood and drops log pi(Z).
/// Priors are on the sampling scale (log diagonal loadings).
GllvmEvaluation evaluate_gllvm(const Dataset& data, const ModelConfig& config, const PosteriorDraws& draws,
                               const ImportanceSample& gsample, const ImportanceFn& g, Approach approach,
                               const QuadratureRule* rule, unsigned threads);

}  // namespace mcprod
