#include "mcprod/conjugate_model.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "mcprod/error.hpp"

namespace mcprod {

namespace {

double normal_logpdf(double x, double mean, double sd) {
  const double u = (x - mean) / sd;
  return -0.5 * u * u - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

void ConjugateModel::validate() const {
  if (y.empty()) throw InputError("ConjugateModel: no observations");
  if (!(s0 > 0.0) || !(tau > 0.0) || !(sigma > 0.0))
    throw InputError("ConjugateModel: s0, tau and sigma must be positive");
}

double ConjugateModel::log_evidence() const {
  validate();
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd cov = (sigma * sigma + tau * tau) * Eigen::MatrixXd::Identity(n, n);
  cov.array() += s0 * s0;
  const Eigen::VectorXd dev = Eigen::Map<const Eigen::VectorXd>(y.data(), n).array() - mu0;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd u = llt.matrixL().solve(dev);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * u.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

double ConjugateModel::log_target(Approach approach, std::span<const double> x) const {
  const std::size_t n = y.size();
  const double theta = x[0];
  double s = normal_logpdf(theta, mu0, s0);
  if (approach == Approach::marginal) {
    if (x.size() != 1) throw InputError("ConjugateModel: marginal parameter is theta alone");
    const double sd = std::sqrt(sigma * sigma + tau * tau);
    for (double yi : y) s += normal_logpdf(yi, theta, sd);
    return s;
  }
  if (x.size() != n + 1) throw InputError("ConjugateModel: joint parameter is (theta, z_1..z_n)");
  for (std::size_t i = 0; i < n; ++i) s += normal_logpdf(x[i + 1], 0.0, tau) + normal_logpdf(y[i], theta + x[i + 1], sigma);
  return s;
}

MultivariateNormal ConjugateModel::posterior(Approach approach) const {
  validate();
  const auto n = static_cast<Eigen::Index>(y.size());
  double ysum = 0.0;
  for (double yi : y) ysum += yi;
  if (approach == Approach::marginal) {
    const double v = sigma * sigma + tau * tau;
    const double prec = 1.0 / (s0 * s0) + static_cast<double>(n) / v;
    Eigen::VectorXd m(1);
    m[0] = (mu0 / (s0 * s0) + ysum / v) / prec;
    return MultivariateNormal(m, Eigen::MatrixXd::Constant(1, 1, 1.0 / prec));
  }
  const double is2 = 1.0 / (sigma * sigma);
  Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd b(n + 1);
  prec(0, 0) = 1.0 / (s0 * s0) + static_cast<double>(n) * is2;
  b[0] = mu0 / (s0 * s0) + ysum * is2;
  for (Eigen::Index i = 0; i < n; ++i) {
    prec(0, i + 1) = prec(i + 1, 0) = is2;
    prec(i + 1, i + 1) = 1.0 / (tau * tau) + is2;
    b[i + 1] = y[static_cast<std::size_t>(i)] * is2;
  }
  const Eigen::MatrixXd cov = prec.llt().solve(Eigen::MatrixXd::Identity(n + 1, n + 1));
  return MultivariateNormal(cov * b, cov);
}

ConjugateModel ConjugateModel::simulate(std::size_t cases, double mu0, double s0, double tau, double sigma,
                                        std::uint64_t seed) {
  Stream s(seed, 0);
  ConjugateModel m;
  m.mu0 = mu0;
  m.s0 = s0;
  m.tau = tau;
  m.sigma = sigma;
  const double theta = s.normal(mu0, s0);
  for (std::size_t i = 0; i < cases; ++i) m.y.push_back(theta + s.normal(0.0, tau) + s.normal(0.0, sigma));
  m.validate();
  return m;
}

BmlInputs conjugate_bml_inputs(const ConjugateModel& model, Approach approach, std::size_t draws,
                               ImportanceChoice choice, Stream& stream) {
  if (draws < 2) throw InputError("conjugate_bml_inputs: need at least two draws");
  const MultivariateNormal post = model.posterior(approach);
  const std::size_t d = post.dim();
  Eigen::MatrixXd pd(static_cast<Eigen::Index>(draws), static_cast<Eigen::Index>(d));
  std::vector<double> x(d);
  for (std::size_t r = 0; r < draws; ++r) {
    post.sample(stream, x);
    for (std::size_t c = 0; c < d; ++c) pd(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x[c];
  }
  const MultivariateNormal g = choice == ImportanceChoice::fitted ? MultivariateNormal::fit(pd) : post;

  BmlInputs in;
  for (std::size_t r = 0; r < draws; ++r) {
    for (std::size_t c = 0; c < d; ++c) x[c] = pd(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    in.post_log_target.push_back(model.log_target(approach, x));
    in.post_log_g.push_back(g.log_density(x));
  }
  for (std::size_t r = 0; r < draws; ++r) {
    g.sample(stream, x);
    in.gdraw_log_target.push_back(model.log_target(approach, x));
    in.gdraw_log_g.push_back(g.log_density(x));
  }
  return in;
}

}  // namespace mcprod
