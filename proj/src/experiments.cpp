#include "mcprod/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <ostream>

#include "mcprod/error.hpp"
#include "mcprod/gllvm_bml.hpp"
#include "mcprod/parallel.hpp"
#include "mcprod/quadrature.hpp"
#include "mcprod/random.hpp"

namespace mcprod {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::vector<std::int64_t> parse_schedule(const std::string& text) {
  std::int64_t start = 0, stop = 0, step = 0;
  char tail = 0;
  const int got = std::sscanf(text.c_str(), "%lld:%lld:%lld%c", reinterpret_cast<long long*>(&start),
                              reinterpret_cast<long long*>(&stop), reinterpret_cast<long long*>(&step), &tail);
  if (got == 1) return {start};
  if (got != 3) throw InputError("r-schedule: expected start:stop:step, got '" + text + "'");
  if (start < 1 || step < 1 || stop < start)
    throw InputError("r-schedule: need 1 <= start <= stop and step >= 1, got '" + text + "'");
  std::vector<std::int64_t> out;
  for (std::int64_t r = start; r <= stop; r += step) out.push_back(r);
  return out;
}

void BetaProductConfig::validate() const {
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) throw InputError("alpha: must be positive and finite");
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) throw InputError("beta: must be positive and finite");
  if (factors < 1) throw InputError("n: need at least one factor");
  if (r_schedule.empty()) throw InputError("r-schedule: empty");
  if (batches < 1) throw InputError("batches: must be >= 1");
  if (batch_size < 0) throw InputError("batch-size: must be >= 0");
  if (replicates < 1) throw InputError("replicates: must be >= 1");
  for (std::size_t n = 0; n < r_schedule.size(); ++n) {
    const std::int64_t r = r_schedule[n];
    if (r < 1) throw InputError("r-schedule: every R must be >= 1");
    if (n && r <= r_schedule[n - 1]) throw InputError("r-schedule: values must increase");
    const std::int64_t size = batch_size > 0 ? batch_size : r / batches;
    if (size < 1 || size * batches > r)
      throw InputError("batches: " + std::to_string(batches) + " batches do not fit in R = " + std::to_string(r));
  }
}

double beta_product_log_truth(double lambda1, double lambda2, std::int64_t factors) {
  return static_cast<double>(factors) * std::log(lambda1 / (lambda1 + lambda2));
}

namespace {

constexpr std::int64_t kChunkRows = 5000;

// log of a Beta(a, b) draw, kept in log form so tiny draws stay finite.
double log_beta_draw(Stream& s, double a, double b) {
  for (;;) {
    const double x = s.gamma(a);
    const double y = s.gamma(b);
    if (x + y > 0.0) return std::log(x) - std::log(x + y);
  }
}

std::vector<BetaProductRow> beta_replicate(const BetaProductConfig& c, std::uint64_t seed) {
  const std::int64_t rmax = c.r_schedule.back();
  const std::size_t n = static_cast<std::size_t>(c.factors);

  // Row positions where column sums are needed: every batch edge of every R.
  std::vector<std::int64_t> edges{0};
  for (std::int64_t r : c.r_schedule) {
    const std::int64_t size = c.batch_size > 0 ? c.batch_size : r / c.batches;
    for (std::int64_t b = 0; b <= c.batches; ++b) edges.push_back(b * size);
    edges.push_back(r);
  }
  for (std::int64_t e = 0; e <= rmax; e += kChunkRows) edges.push_back(e);
  edges.push_back(rmax);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const std::size_t segments = edges.size() - 1;

  // Rows are drawn chunk by chunk, one stream per chunk, so any thread count
  // produces the same numbers.
  const std::int64_t chunks = (rmax + kChunkRows - 1) / kChunkRows;
  std::vector<double> row_log(static_cast<std::size_t>(rmax));
  std::vector<double> seg_sum(segments * n, 0.0);
  parallel_for(static_cast<std::size_t>(chunks), c.threads, [&](std::size_t chunk) {
    Stream s(seed, chunk);
    const std::int64_t begin = static_cast<std::int64_t>(chunk) * kChunkRows;
    const std::int64_t end = std::min(rmax, begin + kChunkRows);
    std::size_t seg = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), begin) - edges.begin()) - 1;
    for (std::int64_t r = begin; r < end; ++r) {
      while (edges[seg + 1] <= r) ++seg;
      double lp = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double lx = log_beta_draw(s, c.lambda1, c.lambda2);
        lp += lx;
        seg_sum[seg * n + i] += std::exp(lx);
      }
      row_log[static_cast<std::size_t>(r)] = lp;
    }
  });

  std::map<std::int64_t, std::vector<double>> prefix;  // edge -> column sums of rows [0, edge)
  {
    std::vector<double> run(n, 0.0);
    prefix[0] = run;
    for (std::size_t g = 0; g < segments; ++g) {
      for (std::size_t i = 0; i < n; ++i) run[i] += seg_sum[g * n + i];
      prefix[edges[g + 1]] = run;
    }
  }
  auto log_joint = [&](std::int64_t a, std::int64_t b) {
    return log_mean_exp(std::span<const double>(row_log.data() + a, static_cast<std::size_t>(b - a)));
  };
  auto log_marginal = [&](std::int64_t a, std::int64_t b) {
    const auto& hi = prefix.at(b);
    const auto& lo = prefix.at(a);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::log((hi[i] - lo[i]) / static_cast<double>(b - a));
    return s;
  };

  std::vector<BetaProductRow> rows;
  const double truth = beta_product_log_truth(c.lambda1, c.lambda2, c.factors);
  for (std::int64_t r : c.r_schedule) {
    BetaProductRow row;
    row.seed = seed;
    row.factors = c.factors;
    row.lambda1 = c.lambda1;
    row.lambda2 = c.lambda2;
    row.r = r;
    row.log_truth = truth;
    row.log_joint = log_joint(0, r);
    row.log_marginal = log_marginal(0, r);
    const std::int64_t size = c.batch_size > 0 ? c.batch_size : r / c.batches;
    if (c.batches >= 2) {
      std::vector<double> bj, bm;
      for (std::int64_t b = 0; b < c.batches; ++b) {
        bj.push_back(log_joint(b * size, (b + 1) * size));
        bm.push_back(log_marginal(b * size, (b + 1) * size));
      }
      row.mce_joint = batch_mce(bj);
      row.mce_marginal = batch_mce(bm);
    } else {
      row.mce_joint = row.mce_marginal = std::numeric_limits<double>::quiet_NaN();
    }
    row.tci = (SignedLog::from_log(row.log_joint) - SignedLog::from_log(row.log_marginal)).value();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<BetaProductRow> beta_product_experiment(const BetaProductConfig& config) {
  config.validate();
  std::vector<BetaProductRow> rows;
  for (std::int64_t rep = 0; rep < config.replicates; ++rep) {
    auto part = beta_replicate(config, config.seed + static_cast<std::uint64_t>(rep));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

void write_beta_product_csv(std::ostream& out, const std::vector<BetaProductRow>& rows) {
  out << "experiment,seed,N,lambda1,lambda2,R,log_truth,log_joint,log_marginal,mce_joint,mce_marginal,tci\n";
  for (const auto& r : rows)
    out << "beta-product," << r.seed << ',' << r.factors << ',' << format_double(r.lambda1) << ','
        << format_double(r.lambda2) << ',' << r.r << ',' << format_double(r.log_truth) << ','
        << format_double(r.log_joint) << ',' << format_double(r.log_marginal) << ',' << format_double(r.mce_joint)
        << ',' << format_double(r.mce_marginal) << ',' << format_double(r.tci) << '\n';
}

void GllvmConfig::validate() const {
  model.validate();
  mcmc.validate();
  if (batches < 1) throw InputError("batches: must be >= 1");
  if (batch_size < 0) throw InputError("batch-size: must be >= 0");
  const std::int64_t size = batch_size > 0 ? batch_size : mcmc.kept / batches;
  if (size < 1 || size * batches > mcmc.kept)
    throw InputError("batches: " + std::to_string(batches) + " batches do not fit in " +
                     std::to_string(mcmc.kept) + " kept draws");
  if (quad_order < 1 || quad_order > kMaxHermiteOrder) throw InputError("quad-order: must lie in 1..100");
  if (data && (data->items() != model.items || data->cases() != model.cases))
    throw InputError("data: dataset shape does not match p and cases");
}

const BmlRun& GllvmResult::run(Estimator e, Approach a) const {
  for (const auto& r : runs)
    if (r.estimator == e && r.approach == a) return r;
  throw InputError("GllvmResult: no run for " + to_string(e) + "_" + to_string(a));
}

namespace {

// Stream indices under the experiment seed.
enum : std::uint64_t { kMcmcStream = 1, kJointGStream = 2, kMarginalGStream = 3 };

void add_block_diagnostics(std::vector<GllvmDiagnostic>& out, const std::string& est, const std::string& block,
                           const SampleBlock& b) {
  const auto m = moments(b);
  std::vector<double> cvs;
  for (double c : m.cv)
    if (std::isfinite(c)) cvs.push_back(c);
  std::sort(cvs.begin(), cvs.end());
  if (!cvs.empty()) {
    const std::size_t h = cvs.size() / 2;
    out.push_back({"cv", est, block, "min", cvs.front()});
    out.push_back({"cv", est, block, "median", cvs.size() % 2 ? cvs[h] : 0.5 * (cvs[h - 1] + cvs[h])});
    out.push_back({"cv", est, block, "max", cvs.back()});
  }
}

}  // namespace

GllvmResult gllvm_experiment(const GllvmConfig& config) {
  config.validate();
  GllvmResult res;
  if (config.data) {
    res.data = *config.data;
  } else {
    auto sim = simulate_dataset(config.model, config.seed);
    res.data = std::move(sim.data);
    res.true_params = std::move(sim.params);
  }

  Stream chain(config.seed, kMcmcStream);
  res.draws = mwg_sample(res.data, config.model, config.mcmc, chain);

  const QuadratureRule rule = tensor_rule(gauss_hermite(config.quad_order), static_cast<int>(config.model.latent_dim));
  BatchScheme scheme;
  scheme.count = config.batches;
  scheme.size = config.batch_size;

  for (Approach approach : {Approach::joint, Approach::marginal}) {
    const ImportanceFn g = fit_importance(res.draws, config.model, approach);
    Stream gs(config.seed, approach == Approach::joint ? kJointGStream : kMarginalGStream);
    const ImportanceSample sample = sample_importance(g, res.draws.size(), gs);
    const GllvmEvaluation ev =
        evaluate_gllvm(res.data, config.model, res.draws, sample, g, approach, &rule, config.threads);
    for (Estimator e : {Estimator::rm, Estimator::bh, Estimator::bg}) {
      res.runs.push_back(run_estimator(e, approach, ev.inputs, scheme));
      if (approach != Approach::joint) continue;
      const std::string tag = to_string(e) + "_joint";
      const IntegrandBlocks blocks = joint_integrand_blocks(e, approach, *ev.posterior_terms, &*ev.gsample_terms);
      add_block_diagnostics(res.diagnostics, tag, "numerator", blocks.numerator);
      if (blocks.denominator) add_block_diagnostics(res.diagnostics, tag, "denominator", *blocks.denominator);
      const IntegrandDiagnostics d = integrand_diagnostics(blocks);
      res.diagnostics.push_back({"tci", tag, "numerator", "tci_sign", double(d.tci.numerator.tci.sign)});
      res.diagnostics.push_back({"tci", tag, "numerator", "tci_log_abs", d.tci.numerator.tci.log_abs});
      res.diagnostics.push_back({"tci", tag, "numerator", "log_gap", d.tci.numerator.log_gap});
      if (d.tci.denominator) {
        res.diagnostics.push_back({"tci", tag, "denominator", "tci_sign", double(d.tci.denominator->tci.sign)});
        res.diagnostics.push_back({"tci", tag, "denominator", "tci_log_abs", d.tci.denominator->tci.log_abs});
        res.diagnostics.push_back({"tci", tag, "denominator", "log_gap", d.tci.denominator->log_gap});
      }
      res.diagnostics.push_back({"tci", tag, "net", "net_log_effect", d.tci.net_log_effect});
    }
  }

  const auto& acc = res.draws.theta_acceptance;
  res.diagnostics.push_back({"mcmc", "", "theta", "acceptance_min", *std::min_element(acc.begin(), acc.end())});
  res.diagnostics.push_back({"mcmc", "", "theta", "acceptance_max", *std::max_element(acc.begin(), acc.end())});
  const auto& zacc = res.draws.z_acceptance;
  res.diagnostics.push_back({"mcmc", "", "z", "acceptance_min", *std::min_element(zacc.begin(), zacc.end())});
  res.diagnostics.push_back({"mcmc", "", "z", "acceptance_max", *std::max_element(zacc.begin(), zacc.end())});
  return res;
}

void write_gllvm_csv(std::ostream& out, const GllvmResult& result) {
  out << "approach,estimator,pooled_log_estimate,batch_mean,mce,batch_index,batch_log_estimate\n";
  for (const auto& run : result.runs) {
    const BatchReportRow row = batch_report(run);
    for (std::size_t b = 0; b < run.batch_log_estimates.size(); ++b)
      out << row.approach << ',' << row.estimator << ',' << format_double(row.pooled_log_estimate) << ','
          << format_double(row.batch_mean) << ',' << format_double(row.mce) << ',' << b + 1 << ','
          << format_double(run.batch_log_estimates[b]) << '\n';
  }
}

void write_gllvm_diagnostics_csv(std::ostream& out, const GllvmResult& result) {
  out << "section,estimator,block,statistic,value\n";
  for (const auto& d : result.diagnostics)
    out << d.section << ',' << d.estimator << ',' << d.block << ',' << d.statistic << ',' << format_double(d.value)
        << '\n';
}

}  // namespace mcprod
