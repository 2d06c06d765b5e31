#include "mcprod/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "mcprod/error.hpp"

namespace mcprod {

MultivariateNormal::MultivariateNormal(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  const Eigen::Index d = mean_.size();
  if (d == 0 || cov_.rows() != d || cov_.cols() != d)
    throw InputError("MultivariateNormal: mean/covariance shape mismatch");
  if (!cov_.allFinite()) throw InputError("MultivariateNormal: non-finite covariance");
  cov_ = 0.5 * (cov_ + cov_.transpose());

  const double scale = std::max(1.0, cov_.diagonal().cwiseAbs().mean());
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  double jitter = 0.0;
  for (double eps = 1e-10; llt.info() != Eigen::Success; eps *= 10.0) {
    if (eps > 1e-2) throw NumericalError("MultivariateNormal: covariance singular after maximum jitter");
    jitter = eps * scale;
    llt.compute(cov_ + jitter * Eigen::MatrixXd::Identity(d, d));
  }
  if (jitter > 0.0) cov_ += jitter * Eigen::MatrixXd::Identity(d, d);
  jitter_ = jitter;
  lower_ = llt.matrixL();
  log_norm_ = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) -
              lower_.diagonal().array().log().sum();
}

MultivariateNormal MultivariateNormal::fit(const Eigen::MatrixXd& draws) {
  if (draws.rows() < 2) throw InputError("MultivariateNormal::fit: need at least two draws");
  Eigen::VectorXd mean = draws.colwise().mean().transpose();
  Eigen::MatrixXd centered = draws.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(draws.rows() - 1);
  return MultivariateNormal(std::move(mean), std::move(cov));
}

double MultivariateNormal::log_density(std::span<const double> x) const {
  if (x.size() != dim()) throw InputError("MultivariateNormal: dimension mismatch");
  Eigen::VectorXd diff = Eigen::Map<const Eigen::VectorXd>(x.data(), mean_.size()) - mean_;
  lower_.triangularView<Eigen::Lower>().solveInPlace(diff);
  return log_norm_ - 0.5 * diff.squaredNorm();
}

void MultivariateNormal::sample(Stream& stream, std::span<double> out) const {
  if (out.size() != dim()) throw InputError("MultivariateNormal: dimension mismatch");
  Eigen::VectorXd z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = stream.normal();
  Eigen::Map<Eigen::VectorXd>(out.data(), mean_.size()) = mean_ + lower_.triangularView<Eigen::Lower>() * z;
}

double MultivariateNormal::entropy() const {
  const double d = static_cast<double>(dim());
  return 0.5 * d * (1.0 + std::log(2.0 * std::numbers::pi)) + lower_.diagonal().array().log().sum();
}

}  // namespace mcprod
