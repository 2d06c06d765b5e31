#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <span>

#include "mcprod/random.hpp"

namespace mcprod {

/// Multivariate normal with a Cholesky factor. A covariance that is not
/// positive definite is regularized by the smallest diagonal jitter
/// (1e-10, 1e-9, ... times the diagonal scale) that makes it so.
class MultivariateNormal {
 public:
  MultivariateNormal() = default;
  MultivariateNormal(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  /// Mean and divisor-(n-1) covariance of the rows of `draws` (n >= 2).
  static MultivariateNormal fit(const Eigen::MatrixXd& draws);

  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  double jitter() const { return jitter_; }

  double log_density(std::span<const double> x) const;
  void sample(Stream& stream, std::span<double> out) const;
  /// Differential entropy 0.5 log det(2 pi e Sigma).
  double entropy() const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd lower_;
  double log_norm_ = 0.0;
  double jitter_ = 0.0;
};

}  // namespace mcprod
