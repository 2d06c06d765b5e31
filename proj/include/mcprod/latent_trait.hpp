#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcprod/gaussian.hpp"
#include "mcprod/quadrature.hpp"
#include "mcprod/random.hpp"

namespace mcprod {

// Binary latent trait model: logit P(y_ij = 1 | z_i) = alpha_j + sum_l beta_jl z_il,
// beta lower triangular with a positive diagonal, z_i ~ N(0, I_k).

struct ModelConfig {
  std::size_t items = 6;
  std::size_t cases = 100;
  std::size_t latent_dim = 1;
  double prior_sd_free = 2.0;  // alpha and off-diagonal beta
  double logdiag_mean = 0.0;   // log beta_jj ~ N(logdiag_mean, logdiag_sd^2)
  double logdiag_sd = 1.0;

  void validate() const;
};

struct ItemParams {
  Eigen::VectorXd alpha;  // items
  Eigen::MatrixXd beta;   // items x latent_dim

  /// Structural zeros exact and diagonal strictly positive.
  bool satisfies_constraints() const;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t cases, std::size_t items, std::vector<std::uint8_t> y);

  std::size_t cases() const { return cases_; }
  std::size_t items() const { return items_; }
  std::uint8_t operator()(std::size_t i, std::size_t j) const { return y_[i * items_ + j]; }
  std::span<const std::uint8_t> row(std::size_t i) const { return {y_.data() + i * items_, items_}; }

 private:
  std::size_t cases_ = 0;
  std::size_t items_ = 0;
  std::vector<std::uint8_t> y_;
};

/// Headered CSV, columns item1..itemp, one 0/1 row per case.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);

// Numerically safe log(1 + exp(x)).
double softplus(double x);
/// log P(y | eta) for a logistic Bernoulli.
inline double bernoulli_logit_logpmf(bool y, double eta) { return y ? -softplus(-eta) : -softplus(eta); }

double response_prob(const ItemParams& theta, std::span<const double> z, std::size_t j);
double linear_predictor(const ItemParams& theta, std::span<const double> z, std::size_t j);

/// log f(y_i | theta, z_i).
double case_joint_loglik(const ItemParams& theta, std::span<const double> z, const Dataset& data, std::size_t i);
/// sum_i log f(y_i | theta, z_i); z is cases x latent_dim.
double joint_loglik(const ItemParams& theta, const Eigen::MatrixXd& z, const Dataset& data);

/// log of the quadrature approximation to int f(y_i | theta, z) phi(z) dz.
double case_marginal_loglik(const ItemParams& theta, const Dataset& data, std::size_t i,
                            const QuadratureRule& rule);
double marginal_loglik(const ItemParams& theta, const Dataset& data, const QuadratureRule& rule);

/// Normal(0, prior_sd_free^2) on alpha and off-diagonal beta, log-normal on
/// the diagonal. -inf if a diagonal entry is not positive.
double log_prior(const ModelConfig& config, const ItemParams& theta);
/// Standard normal log density summed over every latent score.
double log_prior_Z(const Eigen::MatrixXd& z);
double log_prior_z_case(std::span<const double> z);

// Sampling scale: theta is packed as alpha (items) followed by the free beta
// entries row by row, with each diagonal entry stored as its log.
std::size_t theta_dim(const ModelConfig& config);
std::size_t alpha_dim(const ModelConfig& config);
std::vector<double> pack_theta(const ModelConfig& config, const ItemParams& theta);
ItemParams unpack_theta(const ModelConfig& config, std::span<const double> packed);
/// Prior density of the packed vector (log_prior plus the log-diagonal Jacobian).
double log_prior_packed(const ModelConfig& config, std::span<const double> packed);

struct SimulatedData {
  Dataset data;
  ItemParams params;
  Eigen::MatrixXd z;
};

/// alpha and free beta from U(-2, 2), diagonal redrawn until positive,
/// z from N(0, I), responses from the logistic model.
SimulatedData simulate_dataset(const ModelConfig& config, std::uint64_t seed);
Dataset simulate_responses(const ItemParams& theta, const Eigen::MatrixXd& z, Stream& stream);

struct McmcSettings {
  std::int64_t burn_in = 2000;
  std::int64_t thin = 5;
  std::int64_t kept = 5000;
  /// Multiplies the log likelihood; 0 samples the prior.
  double temperature = 1.0;
  double target_acceptance = 0.3;
  double initial_scale = 0.5;

  std::int64_t iterations() const { return burn_in + thin * kept; }
  void validate() const;
};

struct PosteriorDraws {
  Eigen::MatrixXd theta;  // kept x theta_dim, sampling scale
  Eigen::MatrixXd z;      // kept x (cases * latent_dim), case-major
  std::vector<double> theta_acceptance;
  std::vector<double> z_acceptance;  // per case
  std::vector<double> theta_scales;  // frozen proposal scales
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;

  std::size_t size() const { return static_cast<std::size_t>(theta.rows()); }
};

/// Component-wise random-walk Metropolis within Gibbs: alpha_j, free beta_jl
/// (log scale on the diagonal), then one block per case for z_i. Proposal
/// scales adapt toward the target acceptance during burn-in only.
PosteriorDraws mwg_sample(const Dataset& data, const ModelConfig& config, const McmcSettings& settings,
                          Stream& stream);

enum class Approach { joint, marginal };

/// g(alpha) g(beta_e) [prod_i prod_l g(z_il)], fitted from posterior moments.
struct ImportanceFn {
  MultivariateNormal alpha;
  MultivariateNormal beta;
  bool has_z = false;
  std::size_t cases = 0;
  std::size_t latent_dim = 0;
  std::vector<double> z_mean;  // case-major
  std::vector<double> z_sd;

  std::size_t theta_dim() const { return alpha.dim() + beta.dim(); }
  double log_g_theta(std::span<const double> theta) const;
  double log_g_z_case(std::size_t i, std::span<const double> z) const;
  /// log g of the full parameter (theta, plus z when has_z).
  double log_g(std::span<const double> theta, std::span<const double> z) const;
  /// Fills theta (and z when has_z).
  void sample(Stream& stream, std::span<double> theta, std::span<double> z) const;
  double entropy() const;
};

ImportanceFn fit_importance(const PosteriorDraws& draws, const ModelConfig& config, Approach approach);

}  // namespace mcprod
