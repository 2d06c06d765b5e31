#include "mcprod/gllvm_bml.hpp"

#include <string>
#include <vector>

#include "mcprod/error.hpp"
#include "mcprod/parallel.hpp"

namespace mcprod {

ImportanceSample sample_importance(const ImportanceFn& g, std::size_t count, Stream& stream) {
  ImportanceSample s;
  const auto n = static_cast<Eigen::Index>(count);
  s.theta.resize(n, static_cast<Eigen::Index>(g.theta_dim()));
  s.z.resize(g.has_z ? n : 0, static_cast<Eigen::Index>(g.has_z ? g.z_mean.size() : 0));
  std::vector<double> th(g.theta_dim()), z(g.has_z ? g.z_mean.size() : 0);
  for (Eigen::Index r = 0; r < n; ++r) {
    g.sample(stream, th, z);
    for (std::size_t d = 0; d < th.size(); ++d) s.theta(r, static_cast<Eigen::Index>(d)) = th[d];
    for (std::size_t d = 0; d < z.size(); ++d) s.z(r, static_cast<Eigen::Index>(d)) = z[d];
  }
  return s;
}

namespace {

struct Evaluated {
  std::vector<double> log_target, log_g;
  std::optional<CaseTerms> terms;
};

Evaluated evaluate_set(const Dataset& data, const ModelConfig& config, const Eigen::MatrixXd& theta,
                       const Eigen::MatrixXd& z, const ImportanceFn& g, Approach approach,
                       const QuadratureRule* rule, unsigned threads) {
  const std::size_t draws = static_cast<std::size_t>(theta.rows());
  const std::size_t cases = config.cases, k = config.latent_dim;
  Evaluated e;
  e.log_target.resize(draws);
  e.log_g.resize(draws);
  if (approach == Approach::joint) {
    if (static_cast<std::size_t>(z.rows()) != draws || static_cast<std::size_t>(z.cols()) != cases * k)
      throw InputError("evaluate_gllvm: joint mode needs latent draws for every theta draw");
    CaseTerms t;
    t.draws = draws;
    t.cases = cases;
    t.case_log_target.resize(draws * cases);
    t.case_log_g.resize(draws * cases);
    t.theta_log_prior.resize(draws);
    t.theta_log_g.resize(draws);
    e.terms = std::move(t);
  }

  parallel_for(draws, threads, [&](std::size_t r) {
    std::vector<double> th(static_cast<std::size_t>(theta.cols()));
    for (std::size_t d = 0; d < th.size(); ++d) th[d] = theta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d));
    const ItemParams params = unpack_theta(config, th);
    const double lp = log_prior_packed(config, th);
    const double lg = g.log_g_theta(th);
    if (approach == Approach::marginal) {
      e.log_target[r] = marginal_loglik(params, data, *rule) + lp;
      e.log_g[r] = lg;
      return;
    }
    CaseTerms& t = *e.terms;
    double target = lp, gl = lg;
    std::vector<double> zi(k);
    for (std::size_t i = 0; i < cases; ++i) {
      for (std::size_t l = 0; l < k; ++l) zi[l] = z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i * k + l));
      const double ct = case_joint_loglik(params, zi, data, i) + log_prior_z_case(zi);
      const double cg = g.log_g_z_case(i, zi);
      t.case_log_target[r * cases + i] = ct;
      t.case_log_g[r * cases + i] = cg;
      target += ct;
      gl += cg;
    }
    t.theta_log_prior[r] = lp;
    t.theta_log_g[r] = lg;
    e.log_target[r] = target;
    e.log_g[r] = gl;
  });
  return e;
}

}  // namespace

GllvmEvaluation evaluate_gllvm(const Dataset& data, const ModelConfig& config, const PosteriorDraws& draws,
                               const ImportanceSample& gsample, const ImportanceFn& g, Approach approach,
                               const QuadratureRule* rule, unsigned threads) {
  if (approach == Approach::marginal && !rule)
    throw InputError("evaluate_gllvm: marginal mode needs a quadrature rule");
  if (approach == Approach::joint && !g.has_z)
    throw InputError("evaluate_gllvm: joint mode needs an importance function with a latent block");
  if (gsample.size() != draws.size())
    throw InputError("evaluate_gllvm: the g-sample must match the posterior sample size");
  auto post = evaluate_set(data, config, draws.theta, draws.z, g, approach, rule, threads);
  auto gs = evaluate_set(data, config, gsample.theta, gsample.z, g, approach, rule, threads);
  GllvmEvaluation out;
  out.inputs.post_log_target = std::move(post.log_target);
  out.inputs.post_log_g = std::move(post.log_g);
  out.inputs.gdraw_log_target = std::move(gs.log_target);
  out.inputs.gdraw_log_g = std::move(gs.log_g);
  out.posterior_terms = std::move(post.terms);
  out.gsample_terms = std::move(gs.terms);
  return out;
}

}  // namespace mcprod
