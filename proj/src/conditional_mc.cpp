#include "mcprod/conditional_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcprod/error.hpp"
#include "mcprod/product_mc.hpp"

namespace mcprod {

HierarchicalModel gaussian_hierarchy(std::vector<double> offsets, double outer_mean, double outer_sd,
                                     double inner_sd) {
  if (offsets.empty()) throw InputError("gaussian_hierarchy: need at least one factor");
  HierarchicalModel m;
  m.factors = offsets.size();
  m.outer_sampler = [=](Stream& s, std::span<double> v) { v[0] = s.normal(outer_mean, outer_sd); };
  m.inner_sampler = [=](std::size_t i, std::span<const double> v, Stream& s, std::span<double> u) {
    u[0] = s.normal(v[0] + offsets[i], inner_sd);
  };
  m.phi = [](std::size_t, std::span<const double> u, std::span<const double>) { return u[0]; };
  m.cond_mean = [=](std::size_t i, std::span<const double> v) { return v[0] + offsets[i]; };
  m.cond_var = [=](std::size_t, std::span<const double>) { return inner_sd * inner_sd; };
  return m;
}

namespace {

void check_model(const HierarchicalModel& m) {
  if (m.factors == 0 || !m.outer_sampler || !m.inner_sampler || !m.phi)
    throw InputError("HierarchicalModel: factors, samplers and phi are required");
}

// Batch estimates over contiguous row slices, then the report.
EstimateReport report_from_block(const SampleBlock& block, std::int64_t batches, const char* method) {
  EstimateReport rep;
  rep.method = method;
  rep.r_used = static_cast<std::int64_t>(block.rows());
  const SignedLog pooled = joint_estimate(block);
  rep.log_estimate = pooled.log_abs;
  rep.sign = pooled.sign;

  const std::int64_t b = std::min<std::int64_t>(batches, rep.r_used);
  rep.batches = b;
  if (b < 2) {
    rep.mce = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const std::size_t size = block.rows() / static_cast<std::size_t>(b);
  std::vector<SignedLog> est;
  bool all_positive = true;
  for (std::int64_t j = 0; j < b; ++j) {
    est.push_back(joint_estimate(block.slice_rows(j * size, (j + 1) * size)));
    all_positive = all_positive && est.back().is_positive();
  }
  std::vector<double> vals;
  for (const auto& e : est) vals.push_back(all_positive ? e.log_abs : e.value());
  rep.mce_on_log_scale = all_positive;
  rep.mce = batch_mce(vals);
  return rep;
}

SampleBlock joint_block(const HierarchicalModel& model, std::int64_t replications, Stream& stream) {
  check_model(model);
  if (replications < 1) throw InputError("nested_joint: R must be >= 1");
  const std::size_t n = model.factors;
  std::vector<double> v(model.outer_dim), u(model.inner_dim);
  std::vector<double> values(static_cast<std::size_t>(replications) * n);
  for (std::int64_t r = 0; r < replications; ++r) {
    model.outer_sampler(stream, v);
    for (std::size_t i = 0; i < n; ++i) {
      model.inner_sampler(i, v, stream, u);
      values[r * n + i] = model.phi(i, u, v);
    }
  }
  return SampleBlock(static_cast<std::size_t>(replications), n, std::move(values));
}

SampleBlock marginal_block(const HierarchicalModel& model, std::int64_t outer, std::int64_t inner,
                           Stream& stream) {
  check_model(model);
  if (outer < 1) throw InputError("nested_marginal: R1 must be >= 1");
  if (inner < 0) throw InputError("nested_marginal: R2 must be >= 0");
  if (inner == 0 && !model.cond_mean)
    throw InputError("nested_marginal: R2 = 0 requires analytic conditional means");
  const std::size_t n = model.factors;
  std::vector<double> v(model.outer_dim), u(model.inner_dim);
  std::vector<double> values(static_cast<std::size_t>(outer) * n);
  for (std::int64_t r1 = 0; r1 < outer; ++r1) {
    model.outer_sampler(stream, v);
    for (std::size_t i = 0; i < n; ++i) {
      double avg;
      if (inner == 0) {
        avg = model.cond_mean(i, v);
      } else {
        double s = 0.0;
        for (std::int64_t r2 = 0; r2 < inner; ++r2) {
          model.inner_sampler(i, v, stream, u);
          s += model.phi(i, u, v);
        }
        avg = s / static_cast<double>(inner);
      }
      values[r1 * n + i] = avg;
    }
  }
  return SampleBlock(static_cast<std::size_t>(outer), n, std::move(values));
}

}  // namespace

EstimateReport nested_joint(const HierarchicalModel& model, std::int64_t replications, Stream& stream,
                            std::int64_t batches) {
  return report_from_block(joint_block(model, replications, stream), batches, "nested_joint");
}

EstimateReport nested_marginal(const HierarchicalModel& model, std::int64_t outer_replications,
                               std::int64_t inner_replications, Stream& stream, std::int64_t batches) {
  return report_from_block(marginal_block(model, outer_replications, inner_replications, stream), batches,
                           "nested_marginal");
}

double nested_joint_value(const HierarchicalModel& model, std::int64_t replications, Stream& stream) {
  return joint_estimate(joint_block(model, replications, stream)).value();
}

double nested_marginal_value(const HierarchicalModel& model, std::int64_t outer_replications,
                             std::int64_t inner_replications, Stream& stream) {
  return joint_estimate(marginal_block(model, outer_replications, inner_replications, stream)).value();
}

namespace {

// Conditional mean and variance of phi_i at v, analytic or by inner draws.
void conditional_moments(const HierarchicalModel& model, std::span<const double> v, Stream& stream,
                         std::size_t draws, std::vector<double>& mean, std::vector<double>& var) {
  const std::size_t n = model.factors;
  mean.resize(n);
  var.resize(n);
  if (model.has_analytic_moments()) {
    for (std::size_t i = 0; i < n; ++i) {
      mean[i] = model.cond_mean(i, v);
      var[i] = model.cond_var(i, v);
    }
    return;
  }
  if (draws < 2) throw InputError("conditional moments: need at least two inner draws");
  std::vector<double> u(model.inner_dim);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0, ss = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
      model.inner_sampler(i, v, stream, u);
      const double x = model.phi(i, u, v);
      s += x;
      ss += x * x;
    }
    const double m = s / static_cast<double>(draws);
    mean[i] = m;
    var[i] = std::max(0.0, ss / static_cast<double>(draws) - m * m);
  }
}

// sum_k sum_C prod_C (V/damp^k) prod_rest E^2, by the requested route.
double inner_term(const std::vector<double>& mean, const std::vector<double>& var, double damp,
                  CondVarianceMethod method) {
  std::vector<double> damped(var.size());
  for (std::size_t i = 0; i < var.size(); ++i) damped[i] = var[i] / damp;
  const auto m = MomentSummary::from_moments(mean, damped);
  return method == CondVarianceMethod::enumeration ? goodman_subset_sum(m) : goodman_product_variance(m);
}

}  // namespace

CondVariances cond_variance_formulas(const HierarchicalModel& model, const CondVarianceOptions& o,
                                     Stream& stream) {
  check_model(model);
  if (o.joint_replications < 1 || o.outer_replications < 1 || o.inner_replications < 0)
    throw InputError("cond_variance_formulas: need R >= 1, R1 >= 1, R2 >= 0");
  if (o.v_sample_size < 2) throw InputError("cond_variance_formulas: need at least two v draws");
  if (o.method == CondVarianceMethod::enumeration && model.factors > kMaxEnumerationFactors)
    throw InputError("cond_variance_formulas: subset enumeration is capped at N = 12; use the CV form");
  if (o.inner_replications == 0 && !model.cond_mean)
    throw InputError("cond_variance_formulas: R2 = 0 requires analytic conditional means");

  const std::size_t n = model.factors;
  std::vector<double> v(model.outer_dim), mean, var;
  std::vector<double> products(o.v_sample_size), joint_terms(o.v_sample_size);
  double marginal_sum = 0.0;
  for (std::size_t s = 0; s < o.v_sample_size; ++s) {
    model.outer_sampler(stream, v);
    conditional_moments(model, v, stream, o.moment_draws, mean, var);
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= mean[i];
    products[s] = p;
    joint_terms[s] = inner_term(mean, var, 1.0, o.method);
    if (o.inner_replications > 0)
      marginal_sum += inner_term(mean, var, static_cast<double>(o.inner_replications), o.method);
  }

  const double count = static_cast<double>(o.v_sample_size);
  double pm = 0.0;
  for (double p : products) pm += p;
  pm /= count;
  double pv = 0.0;
  for (double p : products) pv += (p - pm) * (p - pm);
  pv /= count;

  double jm = 0.0;
  for (double t : joint_terms) jm += t;
  jm /= count;
  double jv = 0.0;
  for (double t : joint_terms) jv += (t - jm) * (t - jm);
  jv /= count;

  CondVariances out;
  out.common_term = pv;
  out.joint_inner_term = jm;
  out.joint_inner_term_mce = std::sqrt(jv / count);
  out.marginal_inner_term = marginal_sum / count;
  out.var_joint = (pv + jm) / static_cast<double>(o.joint_replications);
  out.var_marginal = (pv + out.marginal_inner_term) / static_cast<double>(o.outer_replications);
  return out;
}

std::vector<CvSummary> cond_cv_diagnostics(const HierarchicalModel& model,
                                           const std::vector<std::vector<double>>& v_draws, Stream& stream,
                                           std::size_t moment_draws) {
  check_model(model);
  const std::size_t n = model.factors;
  std::vector<std::vector<double>> cvs(n);
  std::vector<CvSummary> out(n);
  std::vector<double> mean, var;
  for (const auto& v : v_draws) {
    if (v.size() != model.outer_dim) throw InputError("cond_cv_diagnostics: v has the wrong length");
    conditional_moments(model, v, stream, moment_draws, mean, var);
    for (std::size_t i = 0; i < n; ++i) {
      if (mean[i] == 0.0) {
        ++out[i].flagged;
        continue;
      }
      cvs[i].push_back(std::sqrt(var[i]) / std::fabs(mean[i]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = cvs[i];
    out[i].used = c.size();
    if (c.empty()) {
      out[i].min = out[i].median = out[i].max = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::sort(c.begin(), c.end());
    out[i].min = c.front();
    out[i].max = c.back();
    const std::size_t h = c.size() / 2;
    out[i].median = c.size() % 2 ? c[h] : 0.5 * (c[h - 1] + c[h]);
  }
  return out;
}

}  // namespace mcprod
