// mcprod: batch experiments and verification oracles.
//
//   mcprod beta-product --n 50 --alpha 0.1 --beta 0.2 --out beta.csv
//   mcprod gllvm --p 6 --cases 100 --k 1 --out gllvm.csv
//   mcprod verify all

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "mcprod/error.hpp"
#include "mcprod/experiments.hpp"
#include "mcprod/verify.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const char* code, const std::string& message, int status) {
  std::string one_line = message;
  for (char& c : one_line)
    if (c == '\n') c = ' ';
  std::cerr << "ERROR " << code << ' ' << one_line << std::endl;
  std::exit(status);
}

// Values from the config file override command-line flags; a flag given on
// both sides draws a warning.
class ConfigFile {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    try {
      doc_ = json::parse(in);
    } catch (const json::parse_error& e) {
      throw mcprod::InputError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc_.is_object()) throw mcprod::InputError("config file " + path + " must hold a JSON object");
  }

  template <class T>
  void apply(CLI::App& app, const std::string& key, T& value) {
    if (!doc_.contains(key)) return;
    if (app.count("--" + key) > 0) std::cerr << "WARNING config file overrides --" << key << '\n';
    try {
      value = doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw mcprod::InputError("config field '" + key + "' has the wrong type");
    }
    used_.insert(key);
  }

  void reject_unknown(const std::string& command) const {
    for (const auto& [key, _] : doc_.items())
      if (!used_.count(key)) throw mcprod::InputError("config field '" + key + "' is not an option of " + command);
  }

  bool loaded() const { return !doc_.is_null(); }

 private:
  json doc_;
  std::set<std::string> used_;
};

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master random seed");
  sub->add_option("--out", c.out, "Output CSV path (stdout when omitted)");
  sub->add_option("--config", c.config, "JSON config file; its values win over flags");
  sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
}

void apply_common(CLI::App& sub, ConfigFile& cfg, Common& c) {
  cfg.apply(sub, "seed", c.seed);
  cfg.apply(sub, "out", c.out);
  cfg.apply(sub, "threads", c.threads);
  if (c.threads < 1) throw mcprod::InputError("threads: must be >= 1");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

template <class Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  auto f = open_output(path);
  write(f);
  if (!f) throw IoError("write failed for " + path);
}

std::string sibling(const std::string& out, const std::string& suffix) {
  const fs::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo product estimators, marginal likelihood experiments and oracles"};
  app.require_subcommand(1);

  Common common;

  mcprod::BetaProductConfig beta;
  std::string schedule = "5000:250000:5000";
  auto* beta_cmd = app.add_subcommand("beta-product", "Joint vs marginal estimates of a product of Beta means");
  add_common(beta_cmd, common);
  beta_cmd->add_option("--n", beta.factors, "Number of factors N");
  beta_cmd->add_option("--alpha", beta.lambda1, "Beta shape lambda1");
  beta_cmd->add_option("--beta", beta.lambda2, "Beta shape lambda2");
  beta_cmd->add_option("--r-schedule", schedule, "start:stop:step sample sizes");
  beta_cmd->add_option("--batches", beta.batches, "Batches for the MCE");
  beta_cmd->add_option("--batch-size", beta.batch_size, "Rows per batch (default R / batches)");
  beta_cmd->add_option("--replicates", beta.replicates, "Independent replicates, seeds seed..seed+n-1");

  mcprod::GllvmConfig gl;
  std::string data_in, diag_out, data_out;
  auto* gl_cmd = app.add_subcommand("gllvm", "Joint vs marginal marginal-likelihood estimators on a latent trait model");
  add_common(gl_cmd, common);
  gl_cmd->add_option("--p", gl.model.items, "Items");
  gl_cmd->add_option("--cases", gl.model.cases, "Subjects");
  gl_cmd->add_option("--k", gl.model.latent_dim, "Latent dimension");
  gl_cmd->add_option("--quad-order", gl.quad_order, "Gauss-Hermite order per latent dimension");
  gl_cmd->add_option("--batches", gl.batches, "Batches for the MCE");
  gl_cmd->add_option("--batch-size", gl.batch_size, "Draws per batch (default kept / batches)");
  gl_cmd->add_option("--burn-in", gl.mcmc.burn_in, "MCMC burn-in iterations");
  gl_cmd->add_option("--thin", gl.mcmc.thin, "MCMC thinning interval");
  gl_cmd->add_option("--kept", gl.mcmc.kept, "Stored posterior draws");
  gl_cmd->add_option("--data", data_in, "Dataset CSV (item1..itemp) instead of a simulated one");
  gl_cmd->add_option("--diagnostics", diag_out, "Diagnostics CSV path (default <out>_diagnostics.csv)");
  gl_cmd->add_option("--dataset-out", data_out, "Where to write the dataset (default <out>_dataset.csv)");

  std::string suite = "all";
  std::string fault;
  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle suites");
  verify_cmd->add_option("suite", suite, "product, covariation, quadrature, conditional, bml or all");
  verify_cmd->add_option("--seed", common.seed, "Seed for the randomized checks");
  verify_cmd->add_option("--inject-fault", fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("E_USAGE", e.what(), 2);
  }

  try {
    if (*beta_cmd) {
      ConfigFile cfg;
      if (!common.config.empty()) cfg.load(common.config);
      apply_common(*beta_cmd, cfg, common);
      cfg.apply(*beta_cmd, "n", beta.factors);
      cfg.apply(*beta_cmd, "alpha", beta.lambda1);
      cfg.apply(*beta_cmd, "beta", beta.lambda2);
      cfg.apply(*beta_cmd, "r-schedule", schedule);
      cfg.apply(*beta_cmd, "batches", beta.batches);
      cfg.apply(*beta_cmd, "batch-size", beta.batch_size);
      cfg.apply(*beta_cmd, "replicates", beta.replicates);
      if (cfg.loaded()) cfg.reject_unknown("beta-product");
      beta.r_schedule = mcprod::parse_schedule(schedule);
      beta.seed = common.seed;
      beta.threads = common.threads;
      const auto rows = mcprod::beta_product_experiment(beta);
      emit(common.out, [&](std::ostream& o) { mcprod::write_beta_product_csv(o, rows); });
      return 0;
    }

    if (*gl_cmd) {
      ConfigFile cfg;
      if (!common.config.empty()) cfg.load(common.config);
      apply_common(*gl_cmd, cfg, common);
      cfg.apply(*gl_cmd, "p", gl.model.items);
      cfg.apply(*gl_cmd, "cases", gl.model.cases);
      cfg.apply(*gl_cmd, "k", gl.model.latent_dim);
      cfg.apply(*gl_cmd, "quad-order", gl.quad_order);
      cfg.apply(*gl_cmd, "batches", gl.batches);
      cfg.apply(*gl_cmd, "batch-size", gl.batch_size);
      cfg.apply(*gl_cmd, "burn-in", gl.mcmc.burn_in);
      cfg.apply(*gl_cmd, "thin", gl.mcmc.thin);
      cfg.apply(*gl_cmd, "kept", gl.mcmc.kept);
      cfg.apply(*gl_cmd, "data", data_in);
      cfg.apply(*gl_cmd, "diagnostics", diag_out);
      cfg.apply(*gl_cmd, "dataset-out", data_out);
      if (cfg.loaded()) cfg.reject_unknown("gllvm");
      gl.seed = common.seed;
      gl.threads = common.threads;
      if (!data_in.empty()) {
        std::ifstream in(data_in);
        if (!in) throw IoError("cannot open dataset " + data_in);
        gl.data = mcprod::read_dataset_csv(in);
        if (gl_cmd->count("--p") == 0) gl.model.items = gl.data->items();
        if (gl_cmd->count("--cases") == 0) gl.model.cases = gl.data->cases();
      }
      const auto result = mcprod::gllvm_experiment(gl);
      emit(common.out, [&](std::ostream& o) { mcprod::write_gllvm_csv(o, result); });
      if (diag_out.empty() && !common.out.empty()) diag_out = sibling(common.out, "_diagnostics.csv");
      if (data_out.empty() && !common.out.empty()) data_out = sibling(common.out, "_dataset.csv");
      if (!diag_out.empty())
        emit(diag_out, [&](std::ostream& o) { mcprod::write_gllvm_diagnostics_csv(o, result); });
      if (!data_out.empty()) emit(data_out, [&](std::ostream& o) { mcprod::write_dataset_csv(o, result.data); });
      return 0;
    }

    mcprod::VerifyOptions opt;
    opt.seed = common.seed;
    if (!fault.empty()) {
      if (fault != "tci-sign") throw mcprod::InputError("unknown fault '" + fault + "'");
      opt.flip_tci_decomposition = true;
    }
    const auto checks = mcprod::run_verify(suite, opt);
    mcprod::print_checks(std::cout, checks);
    for (const auto& c : checks)
      if (!c.passed) return 1;
    return 0;
  } catch (const mcprod::InputError& e) {
    fail("E_INPUT", e.what(), 2);
  } catch (const mcprod::NumericalError& e) {
    fail("E_NUMERIC", e.what(), 3);
  } catch (const IoError& e) {
    fail("E_IO", e.what(), 4);
  } catch (const std::exception& e) {
    fail("E_INTERNAL", e.what(), 5);
  }
}
