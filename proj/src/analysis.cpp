#include "netlqr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "netlqr/errors.hpp"

namespace netlqr {

namespace {

std::string fmt(double v) { return format_real(v); }

std::string fmt_opt(const std::optional<double>& v, const char* marker) {
  return v ? format_real(*v) : marker;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

bool is_example(const NetworkedSystem& sys) { return sys.kind != ModelKind::custom; }

// Worst-case J^kappa - J* over the unit ball, i.e. lambda_max(P^kappa - P*) / 2.
double worst_case_gap(const Matrix& dP) {
  return 0.5 * sym_eig_extremes(0.5 * (dP + dP.transpose())).second;
}

}  // namespace

SweepResult run_sweep(const ModelConfig& cfg, const SweepOptions& opts) {
  std::vector<double> etas = opts.etas;
  if (etas.empty()) etas = cfg.eta;
  if (etas.empty()) etas = kDefaultEtaGrid;
  for (double e : etas)
    if (e == 0.0) throw ConfigError("eta values must be nonzero");

  SweepResult out;
  out.model = cfg.model;
  const NetworkedSystem probe = build_system(with_eta(cfg, etas.front()));
  const DistanceMatrix dist = all_pairs_distances(probe.graph);
  out.diameter = diameter(dist);
  out.kappa = opts.kappa ? *opts.kappa : cfg.kappa ? *cfg.kappa : std::make_pair(0, out.diameter);
  const auto [ka, kb] = out.kappa;
  if (ka < 0 || kb < ka) throw ConfigError("kappa range must satisfy 0 <= a <= b");
  const GrowthFunction growth = GrowthFunction::from_table(growth_profile(dist));

  for (double eta : etas) {
    EtaSummary s;
    s.eta = eta;
    const NetworkedSystem sys = build_system(with_eta(cfg, eta));
    s.model_hash = hash_hex(model_hash(sys));
    const DenseSystem d = assemble_dense(sys);
    DareSolution dare;
    try {
      dare = solve_dare(d.A, d.B, d.Q, d.R);
    } catch (const NonConvergence& e) {
      s.error = e.what();
      out.per_eta.push_back(std::move(s));
      continue;
    }
    s.dare_iterations = dare.iterations;
    s.dare_residual = dare.residual;
    const GainMatrix Kstar = optimal_gain(sys, d, dare.P);
    s.optimal_spectral_radius = spectral_radius(closed_loop(d.A, d.B, Kstar.dense()));
    s.profile = block_norm_profile(Kstar, dist);
    const double kstar_norm = spectral_norm(Kstar.dense());
    const double pstar_norm = spectral_norm(dare.P);

    std::optional<BoundConstants> bounds;
    if (opts.bound_audit && is_example(sys)) {
      try {
        bounds = compute_bounds(certify_regularity(sys, cfg.alpha0).rc, growth);
      } catch (const Error& e) {
        s.certification_error = e.what();
      }
    }
    const double kappa_bar_ceil = bounds ? bounds->sc.kappa_bar_ceil() : 0.0;

    std::vector<std::optional<double>> gaps(kb + 1);
    for (int kappa = 0; kappa <= kb; ++kappa) {
      const GainMatrix Kk = truncate_gain(Kstar, dist, kappa);
      const TruncationError te = truncation_error(Kstar, Kk);
      s.abs_trunc_err.push_back(te.absolute);
      const bool in_range = kappa >= ka;
      const bool regret_needed = bounds && static_cast<double>(kappa) >= kappa_bar_ceil;
      if (!in_range && !regret_needed) continue;
      const Matrix phi = closed_loop(d.A, d.B, Kk.dense());
      const double sr = spectral_radius(phi);
      const bool stable = sr < 1.0 - kStabilityMargin;
      std::optional<Matrix> dP;
      if (stable) dP = cost_gap_matrix(d, dare.P, Kstar.dense(), Kk.dense());
      if (dP) gaps[kappa] = worst_case_gap(*dP);
      if (!in_range) continue;
      SweepRow row;
      row.eta = eta;
      row.kappa = kappa;
      if (kstar_norm > 0.0) row.rel_trunc_err = te.relative;
      row.spectral_radius = sr;
      row.stable = stable;
      if (dP) row.rel_opt_gap = pstar_norm > 0.0 ? spectral_norm(*dP) / pstar_norm : 0.0;
      out.rows.push_back(row);
    }
    try {
      s.truncation_fit = fit_decay(s.abs_trunc_err);
    } catch (const InvalidArgument&) {
    }
    if (bounds) {
      s.decay_check = verify_decay_bound(s.profile, bounds->dc);
      s.truncation_check = verify_truncation_bound(s.abs_trunc_err, bounds->tc);
      RegretReport full = verify_regret_bound(gaps, *bounds);
      for (auto& e : full.entries)
        if (e.kappa >= ka) s.regret.entries.push_back(e);
      s.bounds = bounds;
    }
    out.per_eta.push_back(std::move(s));
  }
  return out;
}

void write_sweep_csv(const SweepResult& r, std::ostream& os) {
  os << "eta,kappa,rel_trunc_err,spectral_radius,rel_opt_gap,stable\n";
  for (const auto& row : r.rows)
    os << fmt(row.eta) << ',' << row.kappa << ',' << fmt_opt(row.rel_trunc_err, "undefined") << ','
       << fmt(row.spectral_radius) << ',' << fmt_opt(row.rel_opt_gap, "unbounded") << ','
       << (row.stable ? 1 : 0) << '\n';
}

void write_sweep(const SweepResult& r, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    auto f = open_out(out_dir / "sweep.csv");
    write_sweep_csv(r, f);
  }
  {
    auto f = open_out(out_dir / "decay_profile.csv");
    f << "eta,distance,max_block_norm,pair_count\n";
    for (const auto& s : r.per_eta)
      for (std::size_t d = 0; d < s.profile.max_norm.size(); ++d)
        f << fmt(s.eta) << ',' << d << ',' << fmt(s.profile.max_norm[d]) << ','
          << s.profile.pair_count[d] << '\n';
  }
  {
    auto f = open_out(out_dir / "fits.csv");
    f << "eta,profile_rho_emp,profile_upsilon_emp,truncation_slope,truncation_rate\n";
    for (const auto& s : r.per_eta) {
      if (s.error) continue;
      f << fmt(s.eta) << ',' << fmt_opt(s.profile.rho_emp, "none") << ','
        << fmt_opt(s.profile.upsilon_emp, "none") << ','
        << (s.truncation_fit ? fmt(s.truncation_fit->slope) : "none") << ','
        << (s.truncation_fit ? fmt(s.truncation_fit->rho) : "none") << '\n';
    }
  }
  {
    auto f = open_out(out_dir / "bound_checks.csv");
    f << "eta,check,index,measured,log_bound,status\n";
    for (const auto& s : r.per_eta) {
      if (!s.bounds) continue;
      auto dump = [&](const char* name, const BoundReport& b) {
        for (const auto& e : b.entries)
          f << fmt(s.eta) << ',' << name << ',' << e.index << ',' << fmt(e.measured) << ','
            << fmt(e.log_bound) << ',' << (e.pass ? "pass" : "fail") << '\n';
      };
      dump("decay", s.decay_check);
      dump("truncation", s.truncation_check);
      for (const auto& e : s.regret.entries)
        f << fmt(s.eta) << ",regret," << e.kappa << ',' << fmt_opt(e.gap, "unbounded") << ','
          << fmt(e.log_bound) << ',' << to_string(e.status) << '\n';
    }
  }
  {
    auto f = open_out(out_dir / "sweep_meta.txt");
    f << "model = " << r.model << '\n';
    f << "diameter = " << r.diameter << '\n';
    f << "kappa = " << r.kappa.first << ".." << r.kappa.second << '\n';
    f << "dare_tol = " << fmt(DareOptions{}.tol) << '\n';
    f << "dare_max_iter = " << DareOptions{}.max_iter << '\n';
    f << "stability_margin = " << fmt(kStabilityMargin) << '\n';
    f << "norm_floor = " << fmt(kNormFloor) << '\n';
    for (const auto& s : r.per_eta) {
      const std::string p = "eta[" + fmt(s.eta) + "].";
      f << p << "model_hash = " << s.model_hash << '\n';
      if (s.error) {
        f << p << "error = " << *s.error << '\n';
        continue;
      }
      f << p << "dare_iterations = " << s.dare_iterations << '\n';
      f << p << "dare_residual = " << fmt(s.dare_residual) << '\n';
      f << p << "optimal_spectral_radius = " << fmt(s.optimal_spectral_radius) << '\n';
      if (s.certification_error) f << p << "certification_error = " << *s.certification_error << '\n';
      if (s.bounds) {
        f << p << "log_kappa_bar = " << fmt(s.bounds->sc.log_kappa_bar) << '\n';
        f << p << "decay_bound = " << (s.decay_check.pass() ? "pass" : "fail") << '\n';
        f << p << "truncation_bound = " << (s.truncation_check.pass() ? "pass" : "fail") << '\n';
        f << p << "regret_bound = " << (s.regret.any_violation() ? "fail" : "pass") << '\n';
      }
    }
  }
}

bool ConstantsReport::pass() const {
  return range_violations.empty() && decay_check.pass() && truncation_check.pass() &&
         loop_check.pass() && !regret.any_violation() && optimal_spectral_radius < 1.0;
}

ConstantsReport run_constants_audit(const ModelConfig& cfg, std::optional<double> alpha0) {
  const NetworkedSystem sys = build_system(cfg);
  if (!is_example(sys)) throw InvalidArgument("constants audit needs a built-in example model");
  ConstantsReport r;
  r.model = cfg.model;
  r.eta1 = cfg.eta1;
  r.eta2 = cfg.eta2;
  r.eta3 = cfg.eta3;
  r.cert = certify_regularity(sys, alpha0.value_or(cfg.alpha0));
  const DistanceMatrix dist = all_pairs_distances(sys.graph);
  r.growth = growth_profile(dist);
  r.diameter = diameter(dist);
  r.bounds = compute_bounds(r.cert.rc, GrowthFunction::from_table(r.growth));
  r.range_violations = range_violations(r.bounds);
  r.kappa_bar_within_diameter = r.bounds.sc.kappa_bar() <= r.diameter;

  const DenseSystem d = assemble_dense(sys);
  const DareSolution dare = solve_dare(d.A, d.B, d.Q, d.R);
  r.dare_iterations = dare.iterations;
  const Matrix PmQ = dare.P - d.Q;
  r.min_eig_P_minus_Q = sym_eig_extremes(0.5 * (PmQ + PmQ.transpose())).first;
  r.max_eig_P = sym_eig_extremes(0.5 * (dare.P + dare.P.transpose())).second;
  const GainMatrix Kstar = optimal_gain(sys, d, dare.P);
  r.gain_norm = spectral_norm(Kstar.dense());
  const double L = r.cert.rc.L;
  r.gain_norm_bound = r.bounds.dc.L_P() * L * L / r.cert.rc.gamma;
  const Matrix phi = closed_loop(d.A, d.B, Kstar.dense());
  r.optimal_spectral_radius = spectral_radius(phi);

  std::vector<double> errs;
  std::vector<std::optional<double>> gaps;
  const double kbar = r.bounds.sc.kappa_bar_ceil();
  for (int kappa = 0; kappa <= r.diameter; ++kappa) {
    const GainMatrix Kk = truncate_gain(Kstar, dist, kappa);
    errs.push_back(truncation_error(Kstar, Kk).absolute);
    std::optional<double> gap;
    if (static_cast<double>(kappa) >= kbar) {
      const Matrix phik = closed_loop(d.A, d.B, Kk.dense());
      if (spectral_radius(phik) < 1.0 - kStabilityMargin)
        gap = worst_case_gap(cost_gap_matrix(d, dare.P, Kstar.dense(), Kk.dense()));
    }
    gaps.push_back(gap);
  }
  r.decay_check = verify_decay_bound(block_norm_profile(Kstar, dist), r.bounds.dc);
  r.truncation_check = verify_truncation_bound(errs, r.bounds.tc);
  r.loop_check = verify_loop_decay(phi, r.bounds.dc);
  r.regret = verify_regret_bound(gaps, r.bounds);
  return r;
}

void write_constants_report(const ConstantsReport& r, std::ostream& os) {
  const auto& b = r.bounds;
  os << "model = " << r.model << '\n';
  os << "eta1 = " << fmt(r.eta1) << "\neta2 = " << fmt(r.eta2) << "\neta3 = " << fmt(r.eta3) << '\n';
  os << "L = " << fmt(b.rc.L) << "\nalpha = " << fmt(b.rc.alpha) << "\ngamma = " << fmt(b.rc.gamma) << '\n';
  os << "L_stabilizing = " << fmt(r.cert.L_stabilizing) << '\n';
  os << "L_detecting = " << fmt(r.cert.L_detecting) << '\n';
  os << "log_gamma_F = " << fmt(b.dc.log_gamma_F) << '\n';
  os << "log_gamma_G = " << fmt(b.dc.log_gamma_G) << '\n';
  os << "log_L_P = " << fmt(b.dc.log_L_P) << '\n';
  os << "log_L_H = " << fmt(b.dc.log_L_H) << '\n';
  os << "log_mu_bar = " << fmt(b.dc.log_mu_bar) << '\n';
  os << "log_gamma_H = " << fmt(b.dc.log_gamma_H) << '\n';
  os << "log_Upsilon = " << fmt(b.dc.log_Upsilon) << '\n';
  os << "log_rho = " << fmt(b.dc.rho.log_value) << '\n';
  os << "log_one_minus_rho = " << fmt(b.dc.rho.log_complement) << '\n';
  os << "log_delta = " << fmt(b.tc.delta.log_value) << '\n';
  os << "log_one_minus_delta = " << fmt(b.tc.delta.log_complement) << '\n';
  os << "log_Psi = " << fmt(b.tc.log_Psi) << '\n';
  os << "psi_sup_exact = " << (b.tc.sup_exact ? "yes" : "no") << '\n';
  os << "log_beta = " << fmt(b.sc.beta.log_value) << '\n';
  os << "log_one_minus_beta = " << fmt(b.sc.beta.log_complement) << '\n';
  os << "log_Omega = " << fmt(b.sc.log_Omega) << '\n';
  os << "log_kappa_bar = " << fmt(b.sc.log_kappa_bar) << '\n';
  os << "kappa_bar = " << fmt(b.sc.kappa_bar()) << '\n';
  os << "log_Gamma = " << fmt(b.pc.log_Gamma) << '\n';
  os << "diameter = " << r.diameter << '\n';
  os << "kappa_bar_within_diameter = " << (r.kappa_bar_within_diameter ? "yes" : "no") << '\n';
  os << "growth = ";
  for (std::size_t i = 0; i < r.growth.size(); ++i) os << (i ? "," : "") << r.growth[i];
  os << '\n';
  os << "range_violations = " << r.range_violations.size() << '\n';
  for (const auto& v : r.range_violations) os << "range_violation = " << v << '\n';
  os << "dare_iterations = " << r.dare_iterations << '\n';
  os << "min_eig_P_minus_Q = " << fmt(r.min_eig_P_minus_Q) << '\n';
  os << "max_eig_P = " << fmt(r.max_eig_P) << '\n';
  os << "gain_norm = " << fmt(r.gain_norm) << '\n';
  os << "gain_norm_bound = " << fmt(r.gain_norm_bound) << '\n';
  os << "optimal_spectral_radius = " << fmt(r.optimal_spectral_radius) << '\n';
  os << "decay_bound = " << (r.decay_check.pass() ? "pass" : "fail") << '\n';
  os << "truncation_bound = " << (r.truncation_check.pass() ? "pass" : "fail") << '\n';
  os << "loop_decay_bound = " << (r.loop_check.pass() ? "pass" : "fail") << '\n';
  os << "regret_bound = " << (r.regret.any_violation() ? "fail" : "pass") << '\n';
  int outside = 0;
  for (const auto& e : r.regret.entries) outside += e.status == RegretStatus::outside_hypothesis;
  os << "regret_outside_hypothesis = " << outside << '\n';
  os << "audit = " << (r.pass() ? "pass" : "fail") << '\n';
}

OracleReport run_oracle_check(const ModelConfig& cfg, std::optional<int> T) {
  const NetworkedSystem sys = build_system(cfg);
  const DistanceMatrix dist = all_pairs_distances(sys.graph);
  OracleReport r;
  r.T = T ? *T : (dist.connected() ? diameter(dist) : sys.num_nodes()) + 1;
  if (r.T < 1) throw ConfigError("horizon must be at least 1");
  r.dim = kkt_dimension(sys.total_states(), sys.total_inputs(), r.T);
  if (r.dim > kKktMaxDim)
    throw SizeGuardError("KKT dimension " + std::to_string(r.dim) + " exceeds the limit " +
                         std::to_string(kKktMaxDim) + "; use a smaller instance or horizon");
  const DenseSystem d = assemble_dense(sys);
  const DareSolution dare = solve_dare(d.A, d.B, d.Q, d.R);
  const GainMatrix Kdare = optimal_gain(sys, d, dare.P);
  const KktSystem k = build_kkt(sys, dare.P, r.T);
  const GainMatrix Kkkt = extract_gain_from_kkt(k, sys);
  r.discrepancy = spectral_norm(Kkkt.dense() - Kdare.dense());
  if (kkt_dimension(sys.total_states(), sys.total_inputs(), r.T + 1) <= kKktMaxDim) {
    const KktSystem k1 = build_kkt(sys, dare.P, r.T + 1);
    r.horizon_drift = spectral_norm(extract_gain_from_kkt(k1, sys).dense() - Kkkt.dense());
  }
  const SpaceTimeGraph st = space_time_graph(sys.graph, r.T);
  r.bandwidth_same_stage = kkt_bandwidth(k, st, KktGrouping::same_stage);
  r.bandwidth_transition_stage = kkt_bandwidth(k, st, KktGrouping::transition_stage);
  r.stage0_mismatches = stage0_distance_mismatches(dist, st).size();
  if (is_example(sys)) {
    try {
      const Certification c = certify_regularity(sys, cfg.alpha0);
      const DecayConstants dc = decay_constants(c.rc);
      r.bounds = kkt_singular_bounds(k, c.rc, dc);
      if (k.dim() <= kKktInverseMaxDim) {
        r.inverse_profile = kkt_inverse_block_decay(k, st);
        r.inverse_check = verify_decay_bound(*r.inverse_profile, dc);
      }
    } catch (const Error& e) {
      r.certification_error = e.what();
    }
  }
  return r;
}

void write_oracle_report(const OracleReport& r, std::ostream& os) {
  os << "horizon = " << r.T << '\n';
  os << "kkt_dimension = " << r.dim << '\n';
  os << "gain_discrepancy = " << fmt(r.discrepancy) << '\n';
  os << "horizon_drift = " << fmt_opt(r.horizon_drift, "skipped") << '\n';
  os << "bandwidth_same_stage = " << r.bandwidth_same_stage << '\n';
  os << "bandwidth_transition_stage = " << r.bandwidth_transition_stage << '\n';
  os << "stage0_distance_mismatches = " << r.stage0_mismatches << '\n';
  if (r.certification_error) os << "certification_error = " << *r.certification_error << '\n';
  if (r.bounds) {
    const auto& b = *r.bounds;
    os << "sigma_min = " << fmt(b.sigma_min) << "\nsigma_max = " << fmt(b.sigma_max) << '\n';
    os << "gamma_H = " << fmt(b.gamma_H) << "\nL_H = " << fmt(b.L_H) << '\n';
    os << "block_norm_bound = " << fmt(b.block_norm_bound) << '\n';
    os << "sigma_min_F_sq = " << fmt(b.sigma_min_F_sq) << "\ngamma_F = " << fmt(b.gamma_F) << '\n';
    os << "reduced_hessian_min = " << fmt(b.reduced_hessian_min) << "\ngamma_G = " << fmt(b.gamma_G) << '\n';
    os << "hypothesis = " << (b.hypothesis_ok() ? "pass" : "fail") << '\n';
    for (const auto& h : b.hypothesis_failures) os << "hypothesis_failure = " << h << '\n';
    os << "singular_bounds = " << (b.bounds_ok() ? "pass" : "fail") << '\n';
    for (const auto& h : b.bound_failures) os << "bound_failure = " << h << '\n';
  }
  if (r.inverse_check) os << "inverse_decay_bound = " << (r.inverse_check->pass() ? "pass" : "fail") << '\n';
}

void write_gain(const NetworkedSystem& sys, const GainMatrix& K, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const DistanceMatrix dist = all_pairs_distances(sys.graph);
  {
    auto f = open_out(out_dir / "gain_blocks.csv");
    f << "i,j,distance,block_norm\n";
    for (int i = 0; i < K.num_nodes(); ++i)
      for (int j = 0; j < K.num_nodes(); ++j) {
        const Matrix b = K.block(i, j);
        f << i + 1 << ',' << j + 1 << ',';
        if (dist.reachable(i, j)) f << dist(i, j);
        else f << "unreachable";
        f << ',' << fmt(b.size() ? spectral_norm(b) : 0.0) << '\n';
      }
  }
  auto f = open_out(out_dir / "gain.csv");
  const Matrix& m = K.dense();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) f << (c ? "," : "") << fmt(m(r, c));
    f << '\n';
  }
}

void write_validation_report(const ValidationReport& v, std::ostream& os) {
  os << "norm_A = " << fmt(v.norm_A) << "\nnorm_B = " << fmt(v.norm_B) << '\n';
  os << "norm_Q = " << fmt(v.norm_Q) << "\nnorm_R = " << fmt(v.norm_R) << '\n';
  os << "min_eig_Q = " << fmt(v.min_eig_Q) << "\nmin_eig_R = " << fmt(v.min_eig_R) << '\n';
  os << "sparsity = " << (v.sparsity_ok ? "ok" : "violated") << '\n';
  os << "q_symmetric = " << (v.q_symmetric ? "yes" : "no") << '\n';
  os << "r_symmetric = " << (v.r_symmetric ? "yes" : "no") << '\n';
  os << "q_psd = " << (v.q_psd ? "yes" : "no") << '\n';
  os << "r_pd = " << (v.r_pd ? "yes" : "no") << '\n';
  for (const auto& f : v.failures) os << "failure = " << f << '\n';
  os << "valid = " << (v.ok() ? "yes" : "no") << '\n';
}

void write_uniformity_report(const UniformityReport& u, std::ostream& os) {
  for (const auto& c : u.checks) {
    os << "check = " << c.condition << ' ' << (c.pass ? "pass" : "fail");
    if (c.block >= 0) os << " block " << c.block + 1;
    if (c.other_block >= 0) os << " other " << c.other_block + 1;
    os << " value " << fmt(c.value);
    if (!c.detail.empty()) os << " (" << c.detail << ')';
    os << '\n';
  }
  os << "L0 = " << fmt(u.L0) << "\ngamma0 = " << fmt(u.gamma0) << "\nalpha0 = " << fmt(u.alpha0) << '\n';
  os << "D = " << u.D << '\n';
  if (u.L) os << "L = " << fmt(*u.L) << '\n';
  if (u.gamma) os << "gamma = " << fmt(*u.gamma) << '\n';
  if (u.alpha) os << "alpha = " << fmt(*u.alpha) << '\n';
  os << "uniform = " << (u.pass() ? "pass" : "fail") << '\n';
}

}  // namespace netlqr
