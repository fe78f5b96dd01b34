// netlqr: sweeps, constant audits and oracle checks for networked LQR models.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "netlqr/analysis.hpp"
#include "netlqr/errors.hpp"

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kNonConvergence = 3, kSizeGuard = 4 };

struct Args {
  std::string config;
  std::string out;
  std::string kappa;
  std::string eta;
  std::optional<int> horizon;
  std::optional<double> alpha0;
};

void add_common(CLI::App* sub, Args& a, bool with_out = true) {
  sub->add_option("--config", a.config, "model config file")->required();
  if (with_out) sub->add_option("--out", a.out, "output directory");
  sub->add_option("--kappa", a.kappa, "kappa range a..b");
  sub->add_option("--eta", a.eta, "comma-separated eta values");
  sub->add_option("--horizon", a.horizon, "KKT horizon T");
  sub->add_option("--alpha0", a.alpha0, "certification rate in (0,1)");
}

netlqr::ModelConfig load(const Args& a) {
  netlqr::ModelConfig cfg = netlqr::load_config(a.config);
  if (!a.eta.empty()) {
    cfg.eta = netlqr::parse_real_list(a.eta);
    for (double e : cfg.eta)
      if (e == 0.0) throw netlqr::ConfigError("--eta values must be nonzero");
    cfg.eta1 = cfg.eta2 = cfg.eta.front();
  }
  if (!a.kappa.empty()) cfg.kappa = netlqr::parse_kappa_range(a.kappa);
  if (a.horizon) {
    if (*a.horizon < 1) throw netlqr::ConfigError("--horizon must be at least 1");
    cfg.horizon = a.horizon;
  }
  if (a.alpha0) {
    if (!(*a.alpha0 > 0.0 && *a.alpha0 < 1.0)) throw netlqr::ConfigError("--alpha0 must be in (0,1)");
    cfg.alpha0 = *a.alpha0;
  }
  return cfg;
}

// Prints to stdout and, when an output directory is given, to out/name.
void emit(const Args& a, const std::string& name, const std::string& text) {
  std::cout << text;
  if (a.out.empty()) return;
  std::filesystem::create_directories(a.out);
  std::ofstream f(std::filesystem::path(a.out) / name, std::ios::binary);
  if (!f) throw netlqr::ConfigError("cannot write " + (std::filesystem::path(a.out) / name).string());
  f << text;
}

int cmd_sweep(const Args& a) {
  const netlqr::ModelConfig cfg = load(a);
  const netlqr::SweepResult r = netlqr::run_sweep(cfg);
  const std::string out = a.out.empty() ? "out" : a.out;
  netlqr::write_sweep(r, out);
  bool any_error = false;
  for (const auto& s : r.per_eta) {
    std::cout << "eta " << netlqr::format_real(s.eta) << ": ";
    if (s.error) {
      std::cout << "DARE failed: " << *s.error << '\n';
      any_error = true;
      continue;
    }
    std::cout << "dare iterations " << s.dare_iterations;
    if (s.profile.rho_emp) std::cout << ", rho_emp " << netlqr::format_real(*s.profile.rho_emp);
    std::cout << '\n';
  }
  std::cout << r.rows.size() << " rows written to " << (std::filesystem::path(out) / "sweep.csv").string()
            << '\n';
  return any_error ? kNonConvergence : kOk;
}

int cmd_constants(const Args& a) {
  const netlqr::ModelConfig cfg = load(a);
  const netlqr::ConstantsReport r = netlqr::run_constants_audit(cfg);
  std::ostringstream ss;
  netlqr::write_constants_report(r, ss);
  emit(a, "constants.txt", ss.str());
  return r.pass() ? kOk : kOther;
}

int cmd_oracle(const Args& a) {
  const netlqr::ModelConfig cfg = load(a);
  const netlqr::OracleReport r = netlqr::run_oracle_check(cfg, cfg.horizon);
  std::ostringstream ss;
  netlqr::write_oracle_report(r, ss);
  emit(a, "oracle.txt", ss.str());
  bool ok = r.discrepancy <= 1e-7 && (!r.horizon_drift || *r.horizon_drift <= 1e-9);
  if (r.bounds) ok = ok && r.bounds->hypothesis_ok() && r.bounds->bounds_ok();
  if (r.inverse_check) ok = ok && r.inverse_check->pass();
  return ok ? kOk : kOther;
}

int cmd_gain(const Args& a) {
  const netlqr::ModelConfig cfg = load(a);
  const netlqr::NetworkedSystem sys = netlqr::build_system(cfg);
  const netlqr::DenseSystem d = netlqr::assemble_dense(sys);
  const netlqr::DareSolution dare = netlqr::solve_dare(d.A, d.B, d.Q, d.R);
  const netlqr::GainMatrix K = netlqr::optimal_gain(sys, d, dare.P);
  const std::string out = a.out.empty() ? "out" : a.out;
  netlqr::write_gain(sys, K, out);
  std::cout << "gain " << K.dense().rows() << "x" << K.dense().cols() << " written to " << out << '\n';
  return kOk;
}

int cmd_validate(const Args& a) {
  const netlqr::ModelConfig cfg = load(a);
  const netlqr::ValidationReport v = netlqr::validate(netlqr::build_system(cfg));
  std::ostringstream ss;
  netlqr::write_validation_report(v, ss);
  emit(a, "validate.txt", ss.str());
  return v.ok() ? kOk : kOther;
}

int cmd_uniformity(const Args& a) {
  const netlqr::ModelConfig cfg = load(a);
  const netlqr::NetworkedSystem sys = netlqr::build_system(cfg);
  netlqr::Partition part = netlqr::trivial_partition(sys.num_nodes());
  if (cfg.partition) {
    std::vector<std::vector<int>> blocks = *cfg.partition;
    for (auto& b : blocks)
      for (int& i : b) --i;
    try {
      part = netlqr::make_partition(blocks, sys.num_nodes());
    } catch (const netlqr::InvalidArgument& e) {
      throw netlqr::ConfigError(e.what());
    }
  }
  const netlqr::UniformityReport u = netlqr::check_uniform_conditions(sys, part, cfg.alpha0);
  std::ostringstream ss;
  netlqr::write_uniformity_report(u, ss);
  emit(a, "uniformity.txt", ss.str());
  return u.pass() ? kOk : kOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed LQR analysis for networked systems"};
  app.require_subcommand(1);
  Args args;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Args&);
  };
  const Sub subs[] = {
      {"sweep", "truncation error and optimality gap over (eta, kappa)", cmd_sweep},
      {"constants", "certified constants and bound checks", cmd_constants},
      {"oracle", "KKT gain extraction versus the Riccati gain", cmd_oracle},
      {"gain", "dump the optimal gain", cmd_gain},
      {"validate", "model report", cmd_validate},
      {"uniformity", "partition-based uniformity check", cmd_uniformity},
  };
  int (*chosen)(const Args&) = nullptr;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, args);
    sub->callback([&chosen, run = s.run] { chosen = run; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  try {
    return chosen(args);
  } catch (const netlqr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const netlqr::NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const netlqr::SizeGuardError& e) {
    std::cerr << "size guard: " << e.what() << '\n';
    return kSizeGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
