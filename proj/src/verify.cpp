#include "mcprod/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mcprod/conditional_mc.hpp"
#include "mcprod/conjugate_model.hpp"
#include "mcprod/covariation.hpp"
#include "mcprod/error.hpp"
#include "mcprod/experiments.hpp"
#include "mcprod/product_mc.hpp"
#include "mcprod/quadrature.hpp"
#include "mcprod/random.hpp"

namespace mcprod {

namespace {

double rel_err(double a, double b, double scale) {
  const double s = std::max({std::fabs(a), std::fabs(b), scale});
  return s == 0.0 ? 0.0 : std::fabs(a - b) / s;
}

CheckResult check(const std::string& suite, const std::string& name, double tol, double observed) {
  return {suite, name, tol, observed, observed <= tol};
}

// Random moments; some configurations get zero means.
MomentSummary random_moments(Stream& s, std::size_t n) {
  std::vector<double> e(n), v(n);
  const bool zeros = s.uniform() < 0.3;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = (zeros && s.uniform() < 0.4) ? 0.0 : s.uniform(-2.0, 2.0);
    v[i] = s.uniform(0.0, 3.0);
  }
  return MomentSummary::from_moments(e, v);
}

SampleBlock random_block(Stream& s, std::size_t rows, std::size_t cols) {
  std::vector<double> values(rows * cols);
  for (auto& x : values) x = s.uniform(-1.0, 2.0);
  // Shared row effect so the columns are dependent.
  for (std::size_t r = 0; r < rows; ++r) {
    const double common = s.normal();
    for (std::size_t c = 0; c < cols; ++c) values[r * cols + c] += 0.5 * common;
  }
  return SampleBlock(rows, cols, std::move(values));
}

void product_suite(std::vector<CheckResult>& out, const VerifyOptions& o) {
  double enum_err = 0.0, cvj = 0.0, cvm = 0.0, diff = 0.0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Stream s(o.seed, t);
    const std::size_t n = 1 + s.index_below(12);
    const auto m = random_moments(s, n);
    const std::int64_t r = 2 + static_cast<std::int64_t>(s.index_below(200));
    const double prod = goodman_product_variance(m);
    enum_err = std::max(enum_err, rel_err(prod, goodman_subset_sum(m), 0.0));
    const auto vb = estimator_variances(m, r);
    cvj = std::max(cvj, rel_err(variance_cv_form(m, r, EstimatorKind::joint), vb.var_joint, 0.0));
    cvm = std::max(cvm, rel_err(variance_cv_form(m, r, EstimatorKind::marginal), vb.var_marginal, 0.0));
    // The difference is compared on the scale of the variances it separates.
    diff = std::max(diff, rel_err(variance_difference(m, r), vb.var_joint - vb.var_marginal, vb.var_joint));
  }
  out.push_back(check("product", "subset-enumeration-vs-product-form", 1e-12, enum_err));
  out.push_back(check("product", "cv-form-joint", 1e-12, cvj));
  out.push_back(check("product", "cv-form-marginal", 1e-12, cvm));
  out.push_back(check("product", "variance-difference", 1e-12, diff));

  const auto bern = MomentSummary::from_moments({0.5, 0.5}, {0.25, 0.25});
  const auto vb = estimator_variances(bern, 100);
  out.push_back(check("product", "bernoulli-joint-closed-form", 1e-12, rel_err(vb.var_joint, 1.875e-3, 0.0)));
  out.push_back(check("product", "bernoulli-marginal-closed-form", 1e-12, rel_err(vb.var_marginal, 1.25625e-3, 0.0)));
}

void covariation_suite(std::vector<CheckResult>& out, const VerifyOptions& o) {
  double decomp = 0.0, split = 0.0, bound_excess = 0.0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Stream s(o.seed + 1, t);
    const std::size_t n = 2 + s.index_below(7);
    const std::size_t rows = 5 + s.index_below(60);
    const auto block = random_block(s, rows, n);
    const TciReport rep = tci_report(block);
    const double decomposed = o.flip_tci_decomposition ? -rep.tci_decomposed : rep.tci_decomposed;
    decomp = std::max(decomp, std::fabs(decomposed - rep.tci_direct) / std::max(rep.scale, 1e-300));
    const VarianceSplit vs = variance_underestimation(block);
    split = std::max(split, rel_err(vs.true_variance, vs.indep_variance - vs.tci * vs.tci, vs.indep_variance));
    if (std::fabs(rep.tci_direct) > rep.bound)
      bound_excess = std::max(bound_excess, (std::fabs(rep.tci_direct) - rep.bound) / std::max(rep.bound, 1e-300));
  }
  out.push_back(check("covariation", "tci-decomposition", 1e-10, decomp));
  out.push_back(check("covariation", "variance-underestimation", 1e-10, split));
  out.push_back(check("covariation", "tci-bound", 1e-12, bound_excess));

  // Every combination of two values per column: an exactly independent
  // sample, so the TCI vanishes and the product variance is the Goodman form.
  double indep_tci = 0.0, indep_var = 0.0;
  for (std::size_t n = 2; n <= 8; ++n) {
    Stream s(o.seed + 2, n);
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = s.uniform(-1.0, 1.0);
      hi[i] = s.uniform(0.5, 2.0);
    }
    const std::size_t rows = std::size_t{1} << n;
    std::vector<double> values(rows * n);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = 0; i < n; ++i) values[r * n + i] = (r >> i) & 1 ? hi[i] : lo[i];
    const SampleBlock block(rows, n, std::move(values));
    const VarianceSplit vs = variance_underestimation(block);
    double row_scale = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      double p = 1.0;
      for (double x : block.row(r)) p *= x;
      row_scale = std::max(row_scale, std::fabs(p));
    }
    indep_tci = std::max(indep_tci, std::fabs(vs.tci) / row_scale);
    indep_var = std::max(indep_var, rel_err(vs.true_variance, goodman_product_variance(moments(block, 0.0)), 0.0));
  }
  out.push_back(check("covariation", "independent-enumeration-tci-zero", 1e-12, indep_tci));
  out.push_back(check("covariation", "independent-enumeration-goodman", 1e-12, indep_var));
}

double double_factorial_odd(int m) {  // (m-1)!! for even m
  double v = 1.0;
  for (int j = m - 1; j > 1; j -= 2) v *= j;
  return v;
}

void quadrature_suite(std::vector<CheckResult>& out, const VerifyOptions&) {
  double worst = 0.0, wsum = 0.0;
  for (int order = 1; order <= 40; ++order) {
    const QuadratureRule rule = gauss_hermite(order);
    for (int deg = 0; deg <= 2 * order - 1; ++deg) {
      double m = 0.0, abs_m = 0.0;
      for (std::size_t j = 0; j < rule.size(); ++j) {
        const double t = rule.weights[j] * std::pow(rule.nodes[j], deg);
        m += t;
        abs_m += std::fabs(t);
      }
      // Odd moments vanish; measure them against the size of the terms.
      const double exact = deg % 2 ? 0.0 : double_factorial_odd(deg);
      worst = std::max(worst, std::fabs(m - exact) / std::max(exact, abs_m));
    }
    double s = 0.0;
    for (double w : rule.weights) s += w;
    wsum = std::max(wsum, std::fabs(s - 1.0));
  }
  out.push_back(check("quadrature", "hermite-moments-orders-1-40", 1e-9, worst));
  out.push_back(check("quadrature", "weights-sum-to-one", 1e-12, wsum));
  const QuadratureRule r10 = gauss_hermite(10);
  const double m4 = expect(r10, [](std::span<const double> x) { return std::pow(x[0], 4); });
  out.push_back(check("quadrature", "fourth-moment-order-10", 1e-12, std::fabs(m4 - 3.0) / 3.0));
}

void conditional_suite(std::vector<CheckResult>& out, const VerifyOptions& o) {
  // v ~ N(0,1), u_i | v ~ N(v,1), phi = u, N = 2: Var_J = 5/R and
  // Var_M = (2 + 2/R2 + 1/R2^2)/R1.
  const auto model = gaussian_hierarchy({0.0, 0.0});
  Stream s(o.seed + 3, 0);
  CondVarianceOptions opt;
  opt.joint_replications = 100;
  opt.outer_replications = 100;
  opt.inner_replications = 10;
  opt.v_sample_size = 200000;
  const CondVariances cv = cond_variance_formulas(model, opt, s);
  out.push_back(check("conditional", "gaussian-joint-variance", 0.05, rel_err(cv.var_joint, 5.0 / 100, 0.0)));
  out.push_back(check("conditional", "gaussian-marginal-variance", 0.05,
                      rel_err(cv.var_marginal, (2.0 + 0.2 + 0.01) / 100, 0.0)));
  opt.method = CondVarianceMethod::enumeration;
  Stream s2(o.seed + 3, 0);
  const CondVariances ce = cond_variance_formulas(model, opt, s2);
  out.push_back(check("conditional", "enumeration-matches-cv-form", 1e-12,
                      std::max(rel_err(ce.var_joint, cv.var_joint, 0.0), rel_err(ce.var_marginal, cv.var_marginal, 0.0))));
}

void bml_suite(std::vector<CheckResult>& out, const VerifyOptions& o) {
  const ConjugateModel model = ConjugateModel::simulate(5, 0.5, 1.5, 0.8, 1.0, o.seed + 4);
  const double truth = model.log_evidence();
  BatchScheme scheme;
  scheme.count = 25;
  for (Approach a : {Approach::joint, Approach::marginal}) {
    Stream s(o.seed + 4, a == Approach::joint ? 1 : 2);
    const BmlInputs in = conjugate_bml_inputs(model, a, 100000, ImportanceChoice::fitted, s);
    for (Estimator e : {Estimator::rm, Estimator::bh, Estimator::bg}) {
      const BmlRun run = run_estimator(e, a, in, scheme);
      // Reported in units of the run's MCE; passes when within 3 MCE.
      out.push_back(check("bml", "conjugate-" + to_string(e) + "-" + to_string(a) + "-within-mce", 3.0,
                          std::fabs(run.pooled.log_estimate - truth) / run.mce));
    }
    Stream s2(o.seed + 4, a == Approach::joint ? 3 : 4);
    const BmlInputs exact = conjugate_bml_inputs(model, a, 10000, ImportanceChoice::exact_posterior, s2);
    const BmlRun rm = run_estimator(Estimator::rm, a, exact, scheme);
    out.push_back(check("bml", "exact-g-rm-" + to_string(a), 1e-9, std::fabs(rm.pooled.log_estimate - truth)));
  }
}

}  // namespace

std::vector<std::string> verify_suites() { return {"product", "covariation", "quadrature", "conditional", "bml"}; }

std::vector<CheckResult> run_verify(const std::string& suite, const VerifyOptions& options) {
  std::vector<CheckResult> out;
  const bool all = suite == "all";
  bool known = all;
  auto want = [&](const char* name) {
    const bool w = all || suite == name;
    known = known || w;
    return w;
  };
  if (want("product")) product_suite(out, options);
  if (want("covariation")) covariation_suite(out, options);
  if (want("quadrature")) quadrature_suite(out, options);
  if (want("conditional")) conditional_suite(out, options);
  if (want("bml")) bml_suite(out, options);
  if (!known) throw InputError("verify: unknown suite '" + suite + "'");
  return out;
}

void print_checks(std::ostream& out, const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.suite << '/' << c.name << " observed=" << format_double(c.observed)
        << " tol=" << format_double(c.tolerance) << '\n';
}

}  // namespace mcprod
