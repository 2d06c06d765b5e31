#include "mcprod/covariation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcprod/error.hpp"
#include "mcprod/product_mc.hpp"

namespace mcprod {

namespace {

std::vector<double> row_products(const SampleBlock& block, std::size_t upto) {
  std::vector<double> p(block.rows(), 1.0);
  for (std::size_t r = 0; r < block.rows(); ++r) {
    auto row = block.row(r);
    for (std::size_t c = 0; c < upto; ++c) p[r] *= row[c];
  }
  return p;
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double covariance(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x), my = mean_of(y);
  double s = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) s += (x[r] - mx) * (y[r] - my);
  return s / static_cast<double>(x.size());
}

std::vector<double> column_means(const SampleBlock& block) {
  std::vector<double> e(block.cols(), 0.0);
  for (std::size_t r = 0; r < block.rows(); ++r) {
    auto row = block.row(r);
    for (std::size_t c = 0; c < block.cols(); ++c) e[c] += row[c];
  }
  for (double& v : e) v /= static_cast<double>(block.rows());
  return e;
}

double product_of(std::span<const double> x) {
  double p = 1.0;
  for (double v : x) p *= v;
  return p;
}

}  // namespace

double tci_sample(const SampleBlock& block) {
  const auto p = row_products(block, block.cols());
  const auto e = column_means(block);
  return mean_of(p) - product_of(e);
}

SignedLog tci_sample_log(const SampleBlock& block) {
  return joint_estimate(block) - marginal_estimate(block);
}

double cov_partial(const SampleBlock& block, std::size_t k) {
  if (k < 2 || k > block.cols())
    throw InputError("cov_partial: k = " + std::to_string(k) + " outside [2, " + std::to_string(block.cols()) + "]");
  const auto lead = row_products(block, k - 1);
  const auto col = block.column(k - 1);
  return covariance(lead, col);
}

std::vector<double> partial_product_variances(const SampleBlock& block) {
  std::vector<double> out;
  if (block.cols() < 2) return out;
  std::vector<double> p(block.rows(), 1.0);
  for (std::size_t j = 0; j + 1 < block.cols(); ++j) {
    for (std::size_t r = 0; r < block.rows(); ++r) p[r] *= block(r, j);
    out.push_back(covariance(p, p));
  }
  return out;
}

TciReport tci_decomposition(const SampleBlock& block) {
  const std::size_t n = block.cols();
  if (n < 2) throw InputError("tci_decomposition: need N >= 2");
  const auto e = column_means(block);

  TciReport rep;
  rep.cov_terms.resize(n - 1);
  std::vector<double> lead(block.rows(), 1.0);
  for (std::size_t k = 2; k <= n; ++k) {
    for (std::size_t r = 0; r < block.rows(); ++r) lead[r] *= block(r, k - 2);
    rep.cov_terms[k - 2] = covariance(lead, block.column(k - 1));
  }

  // Cov_(N) + sum_{k=1}^{N-2} [prod_{i=N-k+1}^{N} E_i] Cov_(N-k)
  double total = rep.cov_terms[n - 2];
  double magnitude = std::fabs(total);
  double weight = 1.0;
  for (std::size_t k = 1; k + 2 <= n; ++k) {
    weight *= e[n - k];  // E_{N-k+1}, 0-based index N-k
    const double term = weight * rep.cov_terms[n - k - 2];
    total += term;
    magnitude += std::fabs(term);
  }
  rep.tci_decomposed = total;

  const auto p = row_products(block, n);
  const double joint = mean_of(p);
  const double marginal = product_of(e);
  rep.tci_direct = joint - marginal;
  rep.scale = std::max({std::fabs(joint), std::fabs(marginal), magnitude});
  return rep;
}

double tci_bound(const MomentSummary& m, std::span<const double> ppv) {
  const std::size_t n = m.size();
  if (n < 2) return 0.0;
  if (ppv.size() != n - 1) throw InputError("tci_bound: need N-1 partial product variances");
  for (double v : ppv)
    if (!(v >= 0.0)) throw InputError("tci_bound: negative variance input");
  for (double v : m.variance)
    if (!(v >= 0.0)) throw InputError("tci_bound: negative variance input");

  // E with the E_{N+1} = 1 convention, 1-based.
  auto abs_mean = [&](std::size_t i) { return i == n + 1 ? 1.0 : std::fabs(m.mean[i - 1]); };
  double bound = 0.0;
  for (std::size_t k = 0; k + 2 <= n; ++k) {
    double weight = 1.0;
    for (std::size_t i = n + 1 - k; i <= n + 1; ++i) weight *= abs_mean(i);
    const double lead_var = ppv[n - k - 2];     // Var(prod_{j<=N-k-1} Y_j)
    const double col_var = m.variance[n - k - 1];  // Var(Y_{N-k})
    bound += weight * std::sqrt(lead_var * col_var);
  }
  return bound;
}

VarianceSplit variance_underestimation(const SampleBlock& block) {
  const auto p = row_products(block, block.cols());
  const auto e = column_means(block);
  const double joint = mean_of(p);
  const double marginal = product_of(e);
  VarianceSplit out;
  for (double x : p) {
    out.true_variance += (x - joint) * (x - joint);
    out.indep_variance += (x - marginal) * (x - marginal);
  }
  const double r = static_cast<double>(p.size());
  out.true_variance /= r;
  out.indep_variance /= r;
  out.tci = joint - marginal;
  return out;
}

TciReport tci_report(const SampleBlock& block) {
  TciReport rep;
  if (block.cols() >= 2) {
    rep = tci_decomposition(block);
    rep.bound = tci_bound(moments(block, 0.0), partial_product_variances(block));
  } else {
    rep.tci_direct = rep.tci_decomposed = 0.0;
  }
  const auto split = variance_underestimation(block);
  rep.true_variance = split.true_variance;
  rep.indep_variance = split.indep_variance;
  return rep;
}

namespace {

TciBlockSummary summarize(const SampleBlock& block) {
  for (std::size_t r = 0; r < block.rows(); ++r)
    for (std::size_t c = 0; c < block.cols(); ++c)
      if (!(block(r, c) > 0.0))
        throw InputError("estimator_tci_diagnostics: averaged variables must be positive (row " +
                         std::to_string(r) + ", column " + std::to_string(c) + ")");
  const SignedLog j = joint_estimate(block);
  const SignedLog m = marginal_estimate(block);
  if (!j.is_positive() || !m.is_positive())
    throw InputError("estimator_tci_diagnostics: averaged variables must be positive");
  return {j - m, j.log_abs - m.log_abs};
}

}  // namespace

TciDiagnostics estimator_tci_diagnostics(const SampleBlock& numerator, const SampleBlock* denominator) {
  TciDiagnostics d;
  d.numerator = summarize(numerator);
  d.net_log_effect = d.numerator.log_gap;
  if (denominator) {
    d.denominator = summarize(*denominator);
    d.net_log_effect -= d.denominator->log_gap;
  }
  return d;
}

std::vector<double> tci_trajectory(const SampleBlock& block, std::span<const std::size_t> prefix_sizes) {
  std::vector<double> out;
  out.reserve(prefix_sizes.size());
  for (std::size_t r : prefix_sizes) out.push_back(tci_sample(block.slice_rows(0, r)));
  return out;
}

}  // namespace mcprod
