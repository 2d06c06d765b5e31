#include "mcprod/latent_trait.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "mcprod/error.hpp"

namespace mcprod {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double normal_logpdf(double x, double mean, double sd) {
  const double u = (x - mean) / sd;
  return -0.5 * u * u - std::log(sd) - kHalfLog2Pi;
}

std::size_t free_in_row(std::size_t j, std::size_t k) { return std::min(j + 1, k); }

}  // namespace

void ModelConfig::validate() const {
  if (items < 1) throw InputError("config.items: need at least one item");
  if (cases < 1) throw InputError("config.cases: need at least one case");
  if (latent_dim < 1) throw InputError("config.latent_dim: need at least one latent dimension");
  if (latent_dim > items) throw InputError("config.latent_dim: must not exceed the number of items");
  if (!(prior_sd_free > 0.0) || !std::isfinite(prior_sd_free))
    throw InputError("config.prior_sd_free: must be positive and finite");
  if (!(logdiag_sd > 0.0) || !std::isfinite(logdiag_sd) || !std::isfinite(logdiag_mean))
    throw InputError("config.logdiag: sd must be positive, both finite");
}

bool ItemParams::satisfies_constraints() const {
  if (beta.rows() != alpha.size()) return false;
  for (Eigen::Index j = 0; j < beta.rows(); ++j)
    for (Eigen::Index l = 0; l < beta.cols(); ++l) {
      if (l > j && beta(j, l) != 0.0) return false;
      if (l == j && !(beta(j, l) > 0.0)) return false;
    }
  return true;
}

Dataset::Dataset(std::size_t cases, std::size_t items, std::vector<std::uint8_t> y)
    : cases_(cases), items_(items), y_(std::move(y)) {
  if (y_.size() != cases * items) throw InputError("Dataset: value count does not match cases x items");
  for (std::size_t n = 0; n < y_.size(); ++n)
    if (y_[n] > 1)
      throw InputError("Dataset: entry (" + std::to_string(n / items) + ", " + std::to_string(n % items) +
                       ") is not 0 or 1");
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t j = 0; j < data.items(); ++j) out << (j ? "," : "") << "item" << j + 1;
  out << '\n';
  for (std::size_t i = 0; i < data.cases(); ++i) {
    for (std::size_t j = 0; j < data.items(); ++j) out << (j ? "," : "") << int(data(i, j));
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t items = 0;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell != "item" + std::to_string(items + 1))
        throw InputError("dataset csv: header column " + std::to_string(items + 1) + " should be item" +
                         std::to_string(items + 1));
      ++items;
    }
  }
  if (items == 0) throw InputError("dataset csv: header has no columns");
  std::vector<std::uint8_t> y;
  std::size_t cases = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      if (cell != "0" && cell != "1")
        throw InputError("dataset csv: line " + std::to_string(cases + 2) + " has a value other than 0/1");
      y.push_back(cell == "1");
      ++count;
    }
    if (count != items)
      throw InputError("dataset csv: line " + std::to_string(cases + 2) + " has " + std::to_string(count) +
                       " values, expected " + std::to_string(items));
    ++cases;
  }
  if (cases == 0) throw InputError("dataset csv: no data rows");
  return Dataset(cases, items, std::move(y));
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

double linear_predictor(const ItemParams& theta, std::span<const double> z, std::size_t j) {
  double eta = theta.alpha[j];
  for (std::size_t l = 0; l < z.size(); ++l) eta += theta.beta(j, l) * z[l];
  return eta;
}

double response_prob(const ItemParams& theta, std::span<const double> z, std::size_t j) {
  if (z.size() != static_cast<std::size_t>(theta.beta.cols()))
    throw InputError("response_prob: z length does not match the latent dimension");
  const double eta = linear_predictor(theta, z, j);
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double case_joint_loglik(const ItemParams& theta, std::span<const double> z, const Dataset& data, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = 0; j < data.items(); ++j) s += bernoulli_logit_logpmf(data(i, j), linear_predictor(theta, z, j));
  return s;
}

double joint_loglik(const ItemParams& theta, const Eigen::MatrixXd& z, const Dataset& data) {
  if (static_cast<std::size_t>(z.rows()) != data.cases() || z.cols() != theta.beta.cols() ||
      static_cast<std::size_t>(theta.alpha.size()) != data.items())
    throw InputError("joint_loglik: shapes of theta, z and data disagree");
  double s = 0.0;
  std::vector<double> zi(static_cast<std::size_t>(z.cols()));
  for (std::size_t i = 0; i < data.cases(); ++i) {
    for (std::size_t l = 0; l < zi.size(); ++l) zi[l] = z(i, l);
    s += case_joint_loglik(theta, zi, data, i);
  }
  return s;
}

double case_marginal_loglik(const ItemParams& theta, const Dataset& data, std::size_t i,
                            const QuadratureRule& rule) {
  if (rule.dimension != theta.beta.cols())
    throw InputError("marginal_loglik: quadrature dimension " + std::to_string(rule.dimension) +
                     " does not match latent dimension " + std::to_string(theta.beta.cols()));
  double top = kNegInf;
  thread_local std::vector<double> terms;
  terms.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    terms[q] = std::log(rule.weights[q]) + case_joint_loglik(theta, rule.point(q), data, i);
    top = std::max(top, terms[q]);
  }
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

double marginal_loglik(const ItemParams& theta, const Dataset& data, const QuadratureRule& rule) {
  if (static_cast<std::size_t>(theta.alpha.size()) != data.items())
    throw InputError("marginal_loglik: item count of theta and data disagree");
  double s = 0.0;
  for (std::size_t i = 0; i < data.cases(); ++i) s += case_marginal_loglik(theta, data, i, rule);
  return s;
}

double log_prior(const ModelConfig& config, const ItemParams& theta) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < theta.alpha.size(); ++j) s += normal_logpdf(theta.alpha[j], 0.0, config.prior_sd_free);
  for (Eigen::Index j = 0; j < theta.beta.rows(); ++j)
    for (Eigen::Index l = 0; l <= std::min<Eigen::Index>(j, theta.beta.cols() - 1); ++l) {
      const double b = theta.beta(j, l);
      if (l < j) {
        s += normal_logpdf(b, 0.0, config.prior_sd_free);
      } else {
        if (!(b > 0.0)) return kNegInf;
        const double lb = std::log(b);
        s += normal_logpdf(lb, config.logdiag_mean, config.logdiag_sd) - lb;
      }
    }
  return s;
}

double log_prior_z_case(std::span<const double> z) {
  double s = 0.0;
  for (double x : z) s += -0.5 * x * x - kHalfLog2Pi;
  return s;
}

double log_prior_Z(const Eigen::MatrixXd& z) {
  return -0.5 * z.squaredNorm() - kHalfLog2Pi * static_cast<double>(z.size());
}

std::size_t alpha_dim(const ModelConfig& config) { return config.items; }

std::size_t theta_dim(const ModelConfig& config) {
  std::size_t d = config.items;
  for (std::size_t j = 0; j < config.items; ++j) d += free_in_row(j, config.latent_dim);
  return d;
}

std::vector<double> pack_theta(const ModelConfig& config, const ItemParams& theta) {
  if (!theta.satisfies_constraints()) throw InputError("pack_theta: loadings violate the triangular constraint");
  std::vector<double> out(theta.alpha.data(), theta.alpha.data() + theta.alpha.size());
  for (std::size_t j = 0; j < config.items; ++j)
    for (std::size_t l = 0; l < free_in_row(j, config.latent_dim); ++l)
      out.push_back(l == j ? std::log(theta.beta(j, l)) : theta.beta(j, l));
  return out;
}

ItemParams unpack_theta(const ModelConfig& config, std::span<const double> packed) {
  if (packed.size() != theta_dim(config)) throw InputError("unpack_theta: wrong packed length");
  ItemParams t;
  t.alpha = Eigen::Map<const Eigen::VectorXd>(packed.data(), static_cast<Eigen::Index>(config.items));
  t.beta = Eigen::MatrixXd::Zero(config.items, config.latent_dim);
  std::size_t n = config.items;
  for (std::size_t j = 0; j < config.items; ++j)
    for (std::size_t l = 0; l < free_in_row(j, config.latent_dim); ++l, ++n)
      t.beta(j, l) = l == j ? std::exp(packed[n]) : packed[n];
  return t;
}

double log_prior_packed(const ModelConfig& config, std::span<const double> packed) {
  if (packed.size() != theta_dim(config)) throw InputError("log_prior_packed: wrong packed length");
  double s = 0.0;
  for (std::size_t j = 0; j < config.items; ++j) s += normal_logpdf(packed[j], 0.0, config.prior_sd_free);
  std::size_t n = config.items;
  for (std::size_t j = 0; j < config.items; ++j)
    for (std::size_t l = 0; l < free_in_row(j, config.latent_dim); ++l, ++n)
      s += l == j ? normal_logpdf(packed[n], config.logdiag_mean, config.logdiag_sd)
                  : normal_logpdf(packed[n], 0.0, config.prior_sd_free);
  return s;
}

Dataset simulate_responses(const ItemParams& theta, const Eigen::MatrixXd& z, Stream& stream) {
  const std::size_t cases = static_cast<std::size_t>(z.rows());
  const std::size_t items = static_cast<std::size_t>(theta.alpha.size());
  std::vector<std::uint8_t> y(cases * items);
  std::vector<double> zi(static_cast<std::size_t>(z.cols()));
  for (std::size_t i = 0; i < cases; ++i) {
    for (std::size_t l = 0; l < zi.size(); ++l) zi[l] = z(i, l);
    for (std::size_t j = 0; j < items; ++j) y[i * items + j] = stream.bernoulli(response_prob(theta, zi, j));
  }
  return Dataset(cases, items, std::move(y));
}

SimulatedData simulate_dataset(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Stream stream(seed, 0);
  SimulatedData out;
  out.params.alpha.resize(config.items);
  for (std::size_t j = 0; j < config.items; ++j) out.params.alpha[j] = stream.uniform(-2.0, 2.0);
  out.params.beta = Eigen::MatrixXd::Zero(config.items, config.latent_dim);
  for (std::size_t j = 0; j < config.items; ++j)
    for (std::size_t l = 0; l < free_in_row(j, config.latent_dim); ++l) {
      double b = stream.uniform(-2.0, 2.0);
      if (l == j)
        while (!(b > 0.0)) b = stream.uniform(-2.0, 2.0);
      out.params.beta(j, l) = b;
    }
  out.z.resize(config.cases, config.latent_dim);
  for (std::size_t i = 0; i < config.cases; ++i)
    for (std::size_t l = 0; l < config.latent_dim; ++l) out.z(i, l) = stream.normal();
  out.data = simulate_responses(out.params, out.z, stream);
  return out;
}

void McmcSettings::validate() const {
  if (burn_in < 0) throw InputError("mcmc.burn_in: must be >= 0");
  if (thin < 1) throw InputError("mcmc.thin: must be >= 1");
  if (kept < 2) throw InputError("mcmc.kept: need at least two kept draws");
  if (!(temperature >= 0.0)) throw InputError("mcmc.temperature: must be >= 0");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw InputError("mcmc.target_acceptance: must lie in (0, 1)");
  if (!(initial_scale > 0.0)) throw InputError("mcmc.initial_scale: must be positive");
}

PosteriorDraws mwg_sample(const Dataset& data, const ModelConfig& config, const McmcSettings& settings,
                          Stream& stream) {
  config.validate();
  settings.validate();
  if (data.items() != config.items || data.cases() != config.cases)
    throw InputError("mwg_sample: dataset shape does not match the config");

  const std::size_t p = config.items, n = config.cases, k = config.latent_dim;
  const std::size_t dim = theta_dim(config);
  const double temp = settings.temperature;

  // Packed position -> (row j, column l) for the loading entries.
  struct Slot {
    std::size_t j, l;
  };
  std::vector<Slot> slots;
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t l = 0; l < free_in_row(j, k); ++l) slots.push_back({j, l});

  std::vector<double> th(dim, 0.0);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(p, k);
  for (std::size_t j = 0; j < k; ++j) beta(j, j) = 1.0;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, k);
  // eta(i, j) = alpha_j + beta_j . z_i, kept in sync with every accepted move.
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(n, p);

  std::vector<double> log_scale(dim, std::log(settings.initial_scale));
  std::vector<double> z_log_scale(n, std::log(settings.initial_scale));
  std::vector<std::int64_t> accepted(dim, 0), z_accepted(n, 0);

  auto prior_at = [&](std::size_t idx, double x) {
    if (idx < p) return normal_logpdf(x, 0.0, config.prior_sd_free);
    const Slot& s = slots[idx - p];
    return s.l == s.j ? normal_logpdf(x, config.logdiag_mean, config.logdiag_sd)
                      : normal_logpdf(x, 0.0, config.prior_sd_free);
  };
  auto adapt = [&](double& ls, bool acc, std::int64_t t) {
    const double gain = 1.0 / std::pow(static_cast<double>(t) + 1.0, 0.6);
    ls += gain * ((acc ? 1.0 : 0.0) - settings.target_acceptance);
  };

  PosteriorDraws out;
  out.burn_in = settings.burn_in;
  out.thin = settings.thin;
  out.theta.resize(settings.kept, static_cast<Eigen::Index>(dim));
  out.z.resize(settings.kept, static_cast<Eigen::Index>(n * k));

  std::vector<double> delta(n), zprop(k), eta_row(p);
  std::int64_t stored = 0;
  const std::int64_t total = settings.iterations();
  for (std::int64_t t = 0; t < total; ++t) {
    const bool burning = t < settings.burn_in;

    // Intercepts and loadings: each shifts one column of eta.
    for (std::size_t idx = 0; idx < dim; ++idx) {
      const double cur = th[idx];
      const double prop = cur + std::exp(log_scale[idx]) * stream.normal();
      std::size_t j;
      if (idx < p) {
        j = idx;
        std::fill(delta.begin(), delta.end(), prop - cur);
      } else {
        const Slot& s = slots[idx - p];
        j = s.j;
        const double b_new = s.l == s.j ? std::exp(prop) : prop;
        const double diff = b_new - beta(s.j, s.l);
        for (std::size_t i = 0; i < n; ++i) delta[i] = diff * z(i, s.l);
      }
      double dll = 0.0;
      if (temp > 0.0)
        for (std::size_t i = 0; i < n; ++i)
          dll += bernoulli_logit_logpmf(data(i, j), eta(i, j) + delta[i]) - bernoulli_logit_logpmf(data(i, j), eta(i, j));
      const double log_ratio = temp * dll + prior_at(idx, prop) - prior_at(idx, cur);
      const bool acc = std::log(stream.uniform()) < log_ratio;
      if (acc) {
        th[idx] = prop;
        if (idx >= p) {
          const Slot& s = slots[idx - p];
          beta(s.j, s.l) = s.l == s.j ? std::exp(prop) : prop;
        }
        for (std::size_t i = 0; i < n; ++i) eta(i, j) += delta[i];
      }
      if (burning)
        adapt(log_scale[idx], acc, t);
      else if (acc)
        ++accepted[idx];
    }

    // Latent scores, one block per case.
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::exp(z_log_scale[i]);
      double dprior = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        zprop[l] = z(i, l) + s * stream.normal();
        dprior += -0.5 * (zprop[l] * zprop[l] - z(i, l) * z(i, l));
      }
      double dll = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        double e = eta(i, j);
        for (std::size_t l = 0; l < k; ++l) e += beta(j, l) * (zprop[l] - z(i, l));
        eta_row[j] = e;
        if (temp > 0.0) dll += bernoulli_logit_logpmf(data(i, j), e) - bernoulli_logit_logpmf(data(i, j), eta(i, j));
      }
      const bool acc = std::log(stream.uniform()) < temp * dll + dprior;
      if (acc) {
        for (std::size_t l = 0; l < k; ++l) z(i, l) = zprop[l];
        for (std::size_t j = 0; j < p; ++j) eta(i, j) = eta_row[j];
      }
      if (burning)
        adapt(z_log_scale[i], acc, t);
      else if (acc)
        ++z_accepted[i];
    }

    if (!burning && (t - settings.burn_in + 1) % settings.thin == 0) {
      for (std::size_t d = 0; d < dim; ++d) out.theta(stored, static_cast<Eigen::Index>(d)) = th[d];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) out.z(stored, static_cast<Eigen::Index>(i * k + l)) = z(i, l);
      ++stored;
    }
  }

  const double post = static_cast<double>(settings.thin * settings.kept);
  for (std::size_t d = 0; d < dim; ++d) {
    out.theta_acceptance.push_back(static_cast<double>(accepted[d]) / post);
    out.theta_scales.push_back(std::exp(log_scale[d]));
  }
  for (std::size_t i = 0; i < n; ++i) out.z_acceptance.push_back(static_cast<double>(z_accepted[i]) / post);
  return out;
}

double ImportanceFn::log_g_theta(std::span<const double> theta) const {
  if (theta.size() != theta_dim()) throw InputError("ImportanceFn: theta has the wrong length");
  return alpha.log_density(theta.first(alpha.dim())) + beta.log_density(theta.subspan(alpha.dim()));
}

double ImportanceFn::log_g_z_case(std::size_t i, std::span<const double> z) const {
  double s = 0.0;
  for (std::size_t l = 0; l < latent_dim; ++l) s += normal_logpdf(z[l], z_mean[i * latent_dim + l], z_sd[i * latent_dim + l]);
  return s;
}

double ImportanceFn::log_g(std::span<const double> theta, std::span<const double> z) const {
  double s = log_g_theta(theta);
  if (!has_z) return s;
  if (z.size() != cases * latent_dim) throw InputError("ImportanceFn: z has the wrong length");
  for (std::size_t i = 0; i < cases; ++i) s += log_g_z_case(i, z.subspan(i * latent_dim, latent_dim));
  return s;
}

void ImportanceFn::sample(Stream& stream, std::span<double> theta, std::span<double> z) const {
  if (theta.size() != theta_dim()) throw InputError("ImportanceFn: theta has the wrong length");
  alpha.sample(stream, theta.first(alpha.dim()));
  beta.sample(stream, theta.subspan(alpha.dim()));
  if (!has_z) return;
  if (z.size() != z_mean.size()) throw InputError("ImportanceFn: z has the wrong length");
  for (std::size_t n = 0; n < z_mean.size(); ++n) z[n] = stream.normal(z_mean[n], z_sd[n]);
}

double ImportanceFn::entropy() const {
  double h = alpha.entropy() + beta.entropy();
  if (has_z)
    for (double s : z_sd) h += 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * s * s);
  return h;
}

ImportanceFn fit_importance(const PosteriorDraws& draws, const ModelConfig& config, Approach approach) {
  if (draws.size() < 2) throw InputError("fit_importance: need at least two stored draws");
  const auto p = static_cast<Eigen::Index>(alpha_dim(config));
  if (draws.theta.cols() != static_cast<Eigen::Index>(theta_dim(config)))
    throw InputError("fit_importance: draws do not match the config");
  ImportanceFn g;
  g.alpha = MultivariateNormal::fit(draws.theta.leftCols(p));
  g.beta = MultivariateNormal::fit(draws.theta.rightCols(draws.theta.cols() - p));
  g.cases = config.cases;
  g.latent_dim = config.latent_dim;
  g.has_z = approach == Approach::joint;
  if (g.has_z) {
    const double n = static_cast<double>(draws.size());
    for (Eigen::Index c = 0; c < draws.z.cols(); ++c) {
      const double m = draws.z.col(c).mean();
      double v = (draws.z.col(c).array() - m).square().sum() / (n - 1.0);
      if (!(v > 0.0)) v = 1e-10 * std::max(1.0, m * m);
      g.z_mean.push_back(m);
      g.z_sd.push_back(std::sqrt(v));
    }
  }
  return g;
}

}  // namespace mcprod
