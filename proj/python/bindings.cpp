#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcprod/covariation.hpp"
#include "mcprod/error.hpp"
#include "mcprod/experiments.hpp"
#include "mcprod/product_mc.hpp"
#include "mcprod/quadrature.hpp"
#include "mcprod/verify.hpp"

namespace py = pybind11;
using namespace mcprod;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

SampleBlock to_block(const Array& a) {
  if (a.ndim() != 2) throw InputError("expected a two-dimensional array (rows = draws, columns = factors)");
  const auto* p = a.data();
  return SampleBlock(a.shape(0), a.shape(1), std::vector<double>(p, p + a.size()));
}

MomentSummary to_moments(std::vector<double> mean, std::vector<double> variance) {
  return MomentSummary::from_moments(std::move(mean), std::move(variance));
}

py::tuple signed_log(SignedLog s) { return py::make_tuple(s.log_abs, s.sign); }

py::dict run_to_dict(const BmlRun& r) {
  py::dict d;
  d["approach"] = to_string(r.approach);
  d["estimator"] = to_string(r.estimator);
  d["pooled_log_estimate"] = r.pooled.log_estimate;
  d["batch_mean"] = r.batch_mean;
  d["mce"] = r.mce;
  d["batch_log_estimates"] = r.batch_log_estimates;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Monte Carlo estimators of products of expectations";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("joint_estimate", [](const Array& a) { return signed_log(joint_estimate(to_block(a))); },
        "Mean of row products as (log|value|, sign).");
  m.def("marginal_estimate", [](const Array& a) { return signed_log(marginal_estimate(to_block(a))); },
        "Product of column means as (log|value|, sign).");
  m.def("tci_sample", [](const Array& a) { return tci_sample(to_block(a)); });
  m.def("tci_report", [](const Array& a) {
    const auto r = tci_report(to_block(a));
    py::dict d;
    d["tci_direct"] = r.tci_direct;
    d["tci_decomposed"] = r.tci_decomposed;
    d["cov_terms"] = r.cov_terms;
    d["bound"] = r.bound;
    d["true_variance"] = r.true_variance;
    d["indep_variance"] = r.indep_variance;
    return d;
  });

  m.def("product_variance", [](std::vector<double> mean, std::vector<double> var) {
    return goodman_product_variance(to_moments(std::move(mean), std::move(var)));
  });
  m.def(
      "estimator_variances",
      [](std::vector<double> mean, std::vector<double> var, std::int64_t r) {
        const auto v = estimator_variances(to_moments(std::move(mean), std::move(var)), r);
        py::dict d;
        d["joint"] = v.var_joint;
        d["marginal"] = v.var_marginal;
        d["difference"] = v.difference;
        return d;
      },
      py::arg("mean"), py::arg("variance"), py::arg("replications"));
  m.def("required_iterations", [](std::int64_t rm, std::vector<double> mean, std::vector<double> var) {
    return required_iterations(rm, to_moments(std::move(mean), std::move(var)));
  });

  m.def("gauss_hermite", [](int order) {
    const auto r = gauss_hermite(order);
    return py::make_tuple(r.nodes, r.weights);
  });

  m.def("beta_product_log_truth", &beta_product_log_truth);
  m.def(
      "beta_product",
      [](double alpha, double beta, std::int64_t n, const std::string& schedule, std::int64_t batches,
         std::uint64_t seed, unsigned threads) {
        BetaProductConfig c;
        c.lambda1 = alpha;
        c.lambda2 = beta;
        c.factors = n;
        c.r_schedule = parse_schedule(schedule);
        c.batches = batches;
        c.seed = seed;
        c.threads = threads;
        std::vector<BetaProductRow> rows;
        {
          py::gil_scoped_release release;
          rows = beta_product_experiment(c);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["seed"] = r.seed;
          d["N"] = r.factors;
          d["R"] = r.r;
          d["log_truth"] = r.log_truth;
          d["log_joint"] = r.log_joint;
          d["log_marginal"] = r.log_marginal;
          d["mce_joint"] = r.mce_joint;
          d["mce_marginal"] = r.mce_marginal;
          d["tci"] = r.tci;
          out.append(d);
        }
        return out;
      },
      py::arg("alpha") = 1.0, py::arg("beta") = 2.0, py::arg("n") = 10, py::arg("r_schedule") = "250000",
      py::arg("batches") = 25, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def(
      "gllvm",
      [](std::size_t p, std::size_t cases, std::size_t k, std::int64_t burn_in, std::int64_t thin,
         std::int64_t kept, std::int64_t batches, int quad_order, std::uint64_t seed, unsigned threads) {
        GllvmConfig c;
        c.model.items = p;
        c.model.cases = cases;
        c.model.latent_dim = k;
        c.mcmc.burn_in = burn_in;
        c.mcmc.thin = thin;
        c.mcmc.kept = kept;
        c.batches = batches;
        c.quad_order = quad_order;
        c.seed = seed;
        c.threads = threads;
        GllvmResult res;
        {
          py::gil_scoped_release release;
          res = gllvm_experiment(c);
        }
        py::list runs;
        for (const auto& r : res.runs) runs.append(run_to_dict(r));
        return runs;
      },
      py::arg("p") = 6, py::arg("cases") = 100, py::arg("k") = 1, py::arg("burn_in") = 2000, py::arg("thin") = 5,
      py::arg("kept") = 5000, py::arg("batches") = 25, py::arg("quad_order") = 21, py::arg("seed") = 1,
      py::arg("threads") = 1);

  m.def(
      "verify",
      [](const std::string& suite) {
        py::list out;
        for (const auto& c : run_verify(suite)) {
          py::dict d;
          d["suite"] = c.suite;
          d["name"] = c.name;
          d["tolerance"] = c.tolerance;
          d["observed"] = c.observed;
          d["passed"] = c.passed;
          out.append(d);
        }
        return out;
      },
      py::arg("suite") = "all");
}
