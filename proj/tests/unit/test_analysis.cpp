#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "netlqr/analysis.hpp"
#include "netlqr/errors.hpp"

using namespace netlqr;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(NETLQR_SOURCE_DIR) / "configs";

std::string csv(const SweepResult& r) {
  std::ostringstream os;
  write_sweep_csv(r, os);
  return os.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

bool finite_or_marker(const std::string& cell) {
  if (cell == "unbounded" || cell == "undefined" || cell == "true" || cell == "false") return true;
  std::size_t used = 0;
  const double v = std::stod(cell, &used);
  return used == cell.size() && std::isfinite(v);
}

}  // namespace

TEST_CASE("sweep over a small mesh") {
  const ModelConfig cfg = load_config(kConfigs / "hvac_small.conf");
  SweepOptions o;
  o.etas = {1.0, 4.0};
  const SweepResult r = run_sweep(cfg, o);
  CHECK(r.diameter == 4);
  CHECK(r.kappa == std::make_pair(0, 4));
  REQUIRE(r.rows.size() == 10);
  for (const auto& row : r.rows)
    if (row.kappa == 4) {
      CHECK(*row.rel_trunc_err == 0.0);
      CHECK(*row.rel_opt_gap == 0.0);
    }
  for (const auto& s : r.per_eta) {
    CHECK_FALSE(s.error);
    REQUIRE(s.bounds);
    CHECK(s.decay_check.pass());
    CHECK(s.truncation_check.pass());
    CHECK_FALSE(s.regret.any_violation());
  }

  const auto ls = lines(csv(r));
  CHECK(ls.front() == "eta,kappa,rel_trunc_err,spectral_radius,rel_opt_gap,stable");
  CHECK(ls.size() == 11);
}

TEST_CASE("sweep CSV is deterministic and prefix stable") {
  const ModelConfig cfg = load_config(kConfigs / "power_synthetic.conf");
  SweepOptions o;
  o.etas = {0.5, 2.0};
  o.bound_audit = false;
  const std::string a = csv(run_sweep(cfg, o));
  const std::string b = csv(run_sweep(cfg, o));
  CHECK(a == b);

  SweepOptions narrow = o;
  narrow.kappa = std::make_pair(1, 3);
  const auto wide = lines(a), part = lines(csv(run_sweep(cfg, narrow)));
  for (std::size_t i = 1; i < part.size(); ++i)
    CHECK(std::find(wide.begin(), wide.end(), part[i]) != wide.end());
}

TEST_CASE("unstable truncations carry the unbounded marker") {
  const ModelConfig cfg = load_config(kConfigs / "power_synthetic.conf");
  SweepOptions o;
  o.etas = {0.5};
  o.kappa = std::make_pair(0, 5);
  o.bound_audit = false;
  const SweepResult r = run_sweep(cfg, o);
  REQUIRE_FALSE(r.rows.empty());
  CHECK_FALSE(r.rows.front().stable);
  CHECK_FALSE(r.rows.front().rel_opt_gap);
  const auto ls = lines(csv(r));
  CHECK(ls[1].find("unbounded") != std::string::npos);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    std::istringstream row(ls[i]);
    for (std::string cell; std::getline(row, cell, ',');) CHECK(finite_or_marker(cell));
  }
}

TEST_CASE("sweep output files") {
  const auto out = std::filesystem::temp_directory_path() / "netlqr_test_sweep";
  std::filesystem::remove_all(out);
  SweepOptions o;
  o.etas = {1.0};
  write_sweep(run_sweep(load_config(kConfigs / "hvac_small.conf"), o), out);
  for (const char* f : {"sweep.csv", "decay_profile.csv", "fits.csv", "bound_checks.csv", "sweep_meta.txt"})
    CHECK(std::filesystem::exists(out / f));
  const std::string meta = read_text_file(out / "sweep_meta.txt");
  CHECK(meta.find("model_hash") != std::string::npos);
  CHECK(meta.find("dare_tol") != std::string::npos);
  std::filesystem::remove_all(out);
}

TEST_CASE("constants audit") {
  const ConstantsReport r = run_constants_audit(load_config(kConfigs / "hvac_small.conf"));
  CHECK(r.pass());
  CHECK(r.range_violations.empty());
  CHECK(r.diameter == 4);
  CHECK(r.gain_norm <= r.gain_norm_bound);
  CHECK(r.optimal_spectral_radius < 1.0);
  std::ostringstream os;
  write_constants_report(r, os);
  CHECK(os.str().find("kappa_bar_within_diameter") != std::string::npos);

  CHECK_THROWS_AS(run_constants_audit(parse_config("rows = 2\ncols = 2\neta1 = 0\n")), InvalidArgument);
}

TEST_CASE("oracle check") {
  const OracleReport s = run_oracle_check(load_config(kConfigs / "scalar.conf"));
  CHECK(s.T == 1);
  CHECK(s.discrepancy <= 1e-10);

  const OracleReport h = run_oracle_check(load_config(kConfigs / "hvac_small.conf"));
  CHECK(h.T == 5);
  CHECK(h.discrepancy <= 1e-7);
  REQUIRE(h.horizon_drift);
  CHECK(*h.horizon_drift <= 1e-9);
  CHECK(h.stage0_mismatches == 0);
  REQUIRE(h.bounds);
  CHECK(h.bounds->hypothesis_ok());
  CHECK(h.bounds->bounds_ok());
  REQUIRE(h.inverse_check);
  CHECK(h.inverse_check->pass());

  CHECK_THROWS_AS(run_oracle_check(load_config(kConfigs / "hvac_default.conf")), SizeGuardError);
}

TEST_CASE("gain dump") {
  const NetworkedSystem sys = build_system(parse_config("rows = 1\ncols = 3\n"));
  const DenseSystem d = assemble_dense(sys);
  const GainMatrix K = optimal_gain(sys, d, solve_dare(d.A, d.B, d.Q, d.R).P);
  const auto out = std::filesystem::temp_directory_path() / "netlqr_test_gain";
  std::filesystem::remove_all(out);
  write_gain(sys, K, out);
  const auto blocks = lines(read_text_file(out / "gain_blocks.csv"));
  CHECK(blocks.size() == 10);
  CHECK(blocks[0] == "i,j,distance,block_norm");
  CHECK(lines(read_text_file(out / "gain.csv")).size() >= 3);
  std::filesystem::remove_all(out);
}
