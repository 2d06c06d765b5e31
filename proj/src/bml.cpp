#include "mcprod/bml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mcprod/error.hpp"
#include "mcprod/random.hpp"

namespace mcprod {

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::rm: return "RM";
    case Estimator::bh: return "BH";
    case Estimator::bg: return "BG";
  }
  return "?";
}

std::string to_string(Approach a) { return a == Approach::joint ? "joint" : "marginal"; }

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  for (std::size_t r = 0; r < v.size(); ++r)
    if (!std::isfinite(v[r]))
      throw NumericalError(std::string("bml: non-finite ") + what + " at draw " + std::to_string(r));
}

}  // namespace

void BmlInputs::validate(bool needs_gdraws) const {
  if (post_log_target.empty()) throw InputError("bml: no posterior draws");
  if (post_log_g.size() != post_log_target.size()) throw InputError("bml: posterior term lengths differ");
  check_finite(post_log_target, "log target (posterior sample)");
  check_finite(post_log_g, "log g (posterior sample)");
  if (!needs_gdraws) return;
  if (gdraw_log_g.size() != size() || gdraw_log_target.size() != size())
    throw InputError("bml: the g-sample must have the same size as the posterior sample");
  check_finite(gdraw_log_target, "log target (g-sample)");
  check_finite(gdraw_log_g, "log g (g-sample)");
}

double bml_log_estimate(Estimator estimator, const BmlInputs& in, const std::vector<std::size_t>& idx) {
  std::vector<double> a(idx.size()), b(idx.size());
  switch (estimator) {
    case Estimator::rm:
      for (std::size_t n = 0; n < idx.size(); ++n) a[n] = in.post_log_g[idx[n]] - in.post_log_target[idx[n]];
      return -log_mean_exp(a);
    case Estimator::bh:
      for (std::size_t n = 0; n < idx.size(); ++n) {
        a[n] = -in.gdraw_log_g[idx[n]];
        b[n] = -in.post_log_target[idx[n]];
      }
      return log_mean_exp(a) - log_mean_exp(b);
    case Estimator::bg:
      for (std::size_t n = 0; n < idx.size(); ++n) {
        a[n] = 0.5 * (in.gdraw_log_target[idx[n]] - in.gdraw_log_g[idx[n]]);
        b[n] = -0.5 * (in.post_log_target[idx[n]] - in.post_log_g[idx[n]]);
      }
      return log_mean_exp(a) - log_mean_exp(b);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::size_t> batch_order(std::size_t draws, const BatchScheme& scheme) {
  std::vector<std::size_t> order(draws);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (scheme.shuffled) {
    Stream s(scheme.shuffle_seed, 0x5348);
    for (std::size_t n = draws; n > 1; --n) std::swap(order[n - 1], order[s.index_below(n)]);
  }
  return order;
}

BmlRun run_estimator(Estimator estimator, Approach approach, const BmlInputs& in, const BatchScheme& scheme) {
  in.validate(estimator != Estimator::rm);
  if (scheme.count < 1) throw InputError("batch scheme: count must be >= 1");
  const std::size_t draws = in.size();
  const std::size_t size = scheme.size > 0 ? static_cast<std::size_t>(scheme.size)
                                           : draws / static_cast<std::size_t>(scheme.count);
  const std::size_t used = size * static_cast<std::size_t>(scheme.count);
  if (size == 0 || used > draws)
    throw InputError("batch scheme: " + std::to_string(scheme.count) + " batches of " + std::to_string(size) +
                     " need more than the " + std::to_string(draws) + " available draws");

  const auto order = batch_order(draws, scheme);
  BmlRun run;
  run.estimator = estimator;
  run.approach = approach;
  for (std::int64_t b = 0; b < scheme.count; ++b) {
    std::vector<std::size_t> idx(order.begin() + b * size, order.begin() + (b + 1) * size);
    run.batch_log_estimates.push_back(bml_log_estimate(estimator, in, idx));
  }
  const std::vector<std::size_t> all(order.begin(), order.begin() + used);
  run.pooled.log_estimate = bml_log_estimate(estimator, in, all);
  run.pooled.sign = 1;
  run.pooled.method = to_string(estimator) + "_" + to_string(approach);
  run.pooled.r_used = static_cast<std::int64_t>(used);
  run.pooled.batches = scheme.count;
  run.batch_mean = std::accumulate(run.batch_log_estimates.begin(), run.batch_log_estimates.end(), 0.0) /
                   static_cast<double>(scheme.count);
  if (scheme.count >= 2) {
    run.mce = batch_mce(run.batch_log_estimates);
  } else {
    run.mce = std::numeric_limits<double>::quiet_NaN();
    run.mce_flagged = true;
  }
  run.pooled.mce = run.mce;
  return run;
}

BmlRun rm_estimate(const BmlInputs& in, Approach approach, const BatchScheme& scheme) {
  return run_estimator(Estimator::rm, approach, in, scheme);
}
BmlRun bh_estimate(const BmlInputs& in, Approach approach, const BatchScheme& scheme) {
  return run_estimator(Estimator::bh, approach, in, scheme);
}
BmlRun bg_estimate(const BmlInputs& in, Approach approach, const BatchScheme& scheme) {
  return run_estimator(Estimator::bg, approach, in, scheme);
}

BatchReportRow batch_report(const BmlRun& run) {
  BatchReportRow row;
  row.approach = to_string(run.approach);
  row.estimator = to_string(run.estimator);
  row.pooled_log_estimate = run.pooled.log_estimate;
  row.batch_mean = run.batch_mean;
  row.mce = run.mce;
  row.mce_defined = !run.mce_flagged;
  return row;
}

namespace {

// Block with entries exp(sign * (case term + theta term / N)).
SampleBlock averaged_block(const CaseTerms& t, bool with_g, double sign, bool use_g_only) {
  const std::size_t n = t.cases;
  std::vector<double> values(t.draws * n);
  for (std::size_t r = 0; r < t.draws; ++r) {
    double theta_part;
    if (use_g_only)
      theta_part = -t.theta_log_g[r];
    else
      theta_part = t.theta_log_prior[r] - (with_g ? t.theta_log_g[r] : 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double c;
      if (use_g_only)
        c = -t.case_log_g[r * n + i];
      else
        c = t.case_log_target[r * n + i] - (with_g ? t.case_log_g[r * n + i] : 0.0);
      values[r * n + i] = std::exp(sign * (c + theta_part / static_cast<double>(n)));
    }
  }
  return SampleBlock(t.draws, n, std::move(values));
}

void check_terms(const CaseTerms& t) {
  if (t.draws == 0 || t.cases == 0) throw InputError("joint_integrand_blocks: empty case terms");
  if (t.case_log_target.size() != t.draws * t.cases || t.case_log_g.size() != t.draws * t.cases ||
      t.theta_log_prior.size() != t.draws || t.theta_log_g.size() != t.draws)
    throw InputError("joint_integrand_blocks: case term shapes disagree");
}

double median_cv(const SampleBlock& block) {
  const auto m = moments(block);
  std::vector<double> cvs;
  for (double c : m.cv)
    if (std::isfinite(c)) cvs.push_back(c);
  if (cvs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(cvs.begin(), cvs.end());
  const std::size_t h = cvs.size() / 2;
  return cvs.size() % 2 ? cvs[h] : 0.5 * (cvs[h - 1] + cvs[h]);
}

}  // namespace

IntegrandBlocks joint_integrand_blocks(Estimator estimator, Approach approach, const CaseTerms& posterior,
                                       const CaseTerms* gsample) {
  if (approach != Approach::joint)
    throw InputError("joint_integrand_blocks: defined for joint-mode integrands only");
  check_terms(posterior);
  if (estimator == Estimator::rm)
    // phi_i = [g(z_i) g(theta)^{1/N}] / [f(y_i|.) pi(z_i) pi(theta)^{1/N}]
    return {averaged_block(posterior, true, -1.0, false), std::nullopt};

  if (!gsample) throw InputError("joint_integrand_blocks: bridge estimators need the g-sample terms");
  check_terms(*gsample);
  if (gsample->cases != posterior.cases) throw InputError("joint_integrand_blocks: case counts differ");
  if (estimator == Estimator::bh)
    // numerator 1 / [g(z_i) g(theta)^{1/N}], denominator 1 / [f pi]_i
    return {averaged_block(*gsample, false, 1.0, true), averaged_block(posterior, false, -1.0, false)};
  // numerator sqrt([f pi / g]_i), denominator sqrt([g / f pi]_i)
  return {averaged_block(*gsample, true, 0.5, false), averaged_block(posterior, true, -0.5, false)};
}

IntegrandDiagnostics integrand_diagnostics(const IntegrandBlocks& blocks) {
  IntegrandDiagnostics d;
  d.tci = estimator_tci_diagnostics(blocks.numerator, blocks.denominator ? &*blocks.denominator : nullptr);
  d.numerator_median_cv = median_cv(blocks.numerator);
  if (blocks.denominator) d.denominator_median_cv = median_cv(*blocks.denominator);
  return d;
}

}  // namespace mcprod
