#include "netlqr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "netlqr/errors.hpp"
#include "netlqr/lqr.hpp"
#include "netlqr/model.hpp"

namespace netlqr {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kInf = std::numeric_limits<double>::infinity();

// r with 1 - r^2 = exp(lc2).
UnitRate rate_from_log_one_minus_sq(double lc2) {
  UnitRate r;
  r.log_value = 0.5 * std::log1p(-std::exp(lc2));
  r.log_complement = lc2 - std::log1p(std::exp(r.log_value));
  return r;
}

// log(-log(1 - s)) for s in (0,1) given log s.
double log_neg_log1m(double log_s) {
  const double s = std::exp(log_s);
  if (s > 1e-8) return std::log(-std::log1p(-s));
  return log_s + 0.5 * s;
}

}  // namespace

double UnitRate::value() const { return std::exp(log_value); }
double UnitRate::complement() const { return std::exp(log_complement); }

bool UnitRate::in_open_unit_interval() const {
  return std::isfinite(log_value) && std::isfinite(log_complement) && log_value <= 0.0 &&
         log_complement <= 0.0 && !(log_value == 0.0 && log_complement == 0.0);
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_sum(std::initializer_list<double> terms) {
  double acc = -kInf;
  for (double t : terms) acc = log_add(acc, t);
  return acc;
}

void check_regularity(const RegularityConstants& rc) {
  if (!(rc.L > 1.0) || !std::isfinite(rc.L)) throw InvalidArgument("L must be a finite value > 1");
  if (!(rc.alpha > 0.0 && rc.alpha < 1.0)) throw InvalidArgument("alpha must be in (0,1)");
  if (!(rc.gamma > 0.0 && rc.gamma < 1.0)) throw InvalidArgument("gamma must be in (0,1)");
}

double DecayConstants::gamma_F() const { return std::exp(log_gamma_F); }
double DecayConstants::gamma_G() const { return std::exp(log_gamma_G); }
double DecayConstants::L_P() const { return std::exp(log_L_P); }
double DecayConstants::L_H() const { return std::exp(log_L_H); }
double DecayConstants::mu_bar() const { return std::exp(log_mu_bar); }
double DecayConstants::gamma_H() const { return std::exp(log_gamma_H); }
double DecayConstants::Upsilon() const { return std::exp(log_Upsilon); }

DecayConstants decay_constants(const RegularityConstants& rc) {
  check_regularity(rc);
  const double lL = std::log(rc.L), l1pL = std::log1p(rc.L);
  const double l1ma = std::log1p(-rc.alpha), lg = std::log(rc.gamma);
  DecayConstants c;
  c.log_gamma_F = 2 * l1ma - 2 * lL - 2 * l1pL;
  c.log_gamma_G = 2 * l1ma + lg - kLog2 - 4 * lL - 2 * l1pL;
  c.log_L_P = 3 * lL + log_add(0.0, 2 * lL) - std::log1p(-rc.alpha * rc.alpha);
  c.log_L_H = std::max(log_add(kLog2 + lL, 0.0), log_add(c.log_L_P, 0.0));
  const double lG = c.log_gamma_G, lH = c.log_L_H;
  c.log_mu_bar = log_sum({kLog2 + 2 * lH - lG, lG, lH}) - c.log_gamma_F;
  const double inner = log_sum({0.0, 2 * kLog2 + lH - lG, 2 * kLog2 + 2 * lH - 2 * lG});
  const double t2 = inner + lH + log_add(0.0, c.log_mu_bar + lH) - c.log_gamma_F;
  c.log_gamma_H = -log_sum({kLog2 - lG, t2, c.log_mu_bar});
  c.log_one_minus_rho_sq = kLog2 + 2 * c.log_gamma_H - log_add(2 * lH, 2 * c.log_gamma_H);
  c.rho = rate_from_log_one_minus_sq(c.log_one_minus_rho_sq);
  c.log_Upsilon = lH - 2 * c.log_gamma_H - c.rho.log_value;
  return c;
}

GrowthFunction GrowthFunction::polynomial(double c, double q) {
  if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(q))
    throw InvalidArgument("growth polynomial needs c > 0 and finite q");
  GrowthFunction g;
  g.kind = Kind::polynomial;
  g.c = c;
  g.q = q;
  return g;
}

GrowthFunction GrowthFunction::from_table(const std::vector<int>& profile) {
  if (profile.empty()) throw InvalidArgument("growth table is empty");
  GrowthFunction g;
  g.kind = Kind::table;
  g.table.assign(profile.begin(), profile.end());
  return g;
}

double GrowthFunction::log_at(double d) const {
  if (kind == Kind::polynomial) return std::log(c) + q * std::log1p(d);
  const auto i = static_cast<std::size_t>(d);
  if (d < 0 || i >= table.size() || !(table[i] > 0)) return -kInf;
  return std::log(table[i]);
}

double TruncationConstants::Psi() const { return std::exp(log_Psi); }

TruncationConstants truncation_constants(const DecayConstants& dc, const GrowthFunction& p) {
  TruncationConstants t;
  const double one_minus_rho = dc.rho.complement();
  t.delta.log_value = std::log1p(-0.5 * one_minus_rho);
  t.delta.log_complement = dc.rho.log_complement - kLog2;
  // lambda = -log(rho / delta) > 0
  const double lambda = t.delta.log_value - dc.rho.log_value;
  const double log_lambda = lambda > 1e-300 ? std::log(lambda) : t.delta.log_complement;
  const double lam = std::exp(log_lambda);
  if (!std::isfinite(log_lambda))
    throw NumericalError("truncation constants: p(d)(rho/delta)^d does not decay");
  auto term = [&](double d) { return p.log_at(d) - lam * d; };
  if (p.kind == GrowthFunction::Kind::table) {
    t.log_sup = -kInf;
    for (std::size_t d = 0; d < p.table.size(); ++d)
      if (double v = term(static_cast<double>(d)); v > t.log_sup) {
        t.log_sup = v;
        t.sup_argmax = static_cast<double>(d);
      }
    if (t.log_sup == -kInf) throw InvalidArgument("growth table has no positive entry");
  } else if (p.q <= 0.0) {
    t.log_sup = term(0.0);
  } else {
    const double log_peak = std::log(p.q) - log_lambda;  // log(1 + d*)
    if (log_peak <= 0.0) {
      t.log_sup = term(0.0);
    } else if (log_peak <= std::log(1e6 + 1.0)) {
      const double dstar = std::expm1(log_peak);
      const double lo = std::floor(dstar), hi = std::ceil(dstar);
      const double vlo = term(lo), vhi = term(hi);
      t.log_sup = std::max(vlo, vhi);
      t.sup_argmax = vlo >= vhi ? lo : hi;
    } else {
      t.log_sup = std::log(p.c) + p.q * log_peak - p.q + lam;
      t.sup_argmax = std::expm1(log_peak);
      t.sup_exact = false;
    }
  }
  t.log_Psi = t.log_sup + dc.log_Upsilon + t.delta.log_value - t.delta.log_complement;
  return t;
}

double StabilityConstants::Omega() const { return std::exp(log_Omega); }

double StabilityConstants::kappa_bar() const {
  return kappa_bar_clamped ? 0.0 : std::exp(log_kappa_bar);
}

double StabilityConstants::kappa_bar_ceil() const {
  const double k = kappa_bar();
  if (!(k < 9007199254740992.0)) return kInf;
  return std::ceil(k);
}

StabilityConstants stability_constants(const DecayConstants& dc, const TruncationConstants& tc,
                                       const RegularityConstants& rc) {
  check_regularity(rc);
  StabilityConstants s;
  const double lc2 = dc.log_one_minus_rho_sq, lU = dc.log_Upsilon;
  s.log_one_minus_beta_sq = lc2 - kLog2 - 2 * lU;
  s.beta = rate_from_log_one_minus_sq(s.log_one_minus_beta_sq);
  s.log_Omega = lU - 0.5 * lc2;
  const double lL = std::log(rc.L), lg = std::log(rc.gamma);
  const double inner =
      log_add(lL + tc.log_Psi, kLog2 + lL + log_add(0.0, dc.log_L_P + 2 * lL - lg));
  const double log_x = lc2 - kLog2 - 2 * lU - tc.log_Psi - lL - inner;
  if (log_x >= 0.0) {
    s.kappa_bar_clamped = true;
    s.log_kappa_bar = -kInf;
  } else {
    s.log_kappa_bar = std::log(-log_x) - log_neg_log1m(tc.delta.log_complement);
  }
  return s;
}

double PerformanceConstant::Gamma() const { return std::exp(log_Gamma); }

PerformanceConstant performance_constant(const DecayConstants& dc, const TruncationConstants& tc,
                                         const StabilityConstants& sc, const RegularityConstants& rc) {
  check_regularity(rc);
  const double lL = std::log(rc.L), lg = std::log(rc.gamma), lP = dc.log_L_P;
  const double a = log_add(0.0, lL + lP) + log_add(kLog2 + lP + 2 * lL - lg, tc.log_Psi);
  const double b = kLog2 + lL + lP;
  PerformanceConstant pc;
  pc.log_Gamma = 2 * sc.log_Omega + lL + tc.log_Psi + log_add(a, b) - sc.log_one_minus_beta_sq;
  return pc;
}

BoundConstants compute_bounds(const RegularityConstants& rc, const GrowthFunction& p) {
  BoundConstants b;
  b.rc = rc;
  b.dc = decay_constants(rc);
  b.tc = truncation_constants(b.dc, p);
  b.sc = stability_constants(b.dc, b.tc, rc);
  b.pc = performance_constant(b.dc, b.tc, b.sc, rc);
  return b;
}

std::vector<std::string> range_violations(const BoundConstants& b) {
  std::vector<std::string> v;
  if (!b.dc.rho.in_open_unit_interval()) v.push_back("rho not in (0,1)");
  if (!b.tc.delta.in_open_unit_interval()) v.push_back("delta not in (0,1)");
  if (!b.sc.beta.in_open_unit_interval()) v.push_back("beta not in (0,1)");
  if (!(b.dc.log_Upsilon >= 0.0)) v.push_back("Upsilon < 1");
  if (!(b.dc.log_L_H > 0.0)) v.push_back("L_H <= 1");
  if (!(b.dc.log_gamma_H < 0.0)) v.push_back("gamma_H >= 1");
  const bool delta_above_rho = b.tc.delta.log_value > b.dc.rho.log_value ||
                               b.tc.delta.log_complement < b.dc.rho.log_complement;
  if (!delta_above_rho) v.push_back("delta <= rho");
  for (double x : {b.tc.log_Psi, b.sc.log_Omega, b.pc.log_Gamma, b.dc.log_Upsilon})
    if (!std::isfinite(x)) {
      v.push_back("non-finite constant");
      break;
    }
  return v;
}

Certification certify_regularity(const NetworkedSystem& sys, double alpha0) {
  const CertificateGains g = nilpotent_gain(sys);
  const DenseSystem d = assemble_dense(sys);
  Certification c;
  c.L_stabilizing = certify_stability_pair(closed_loop(d.A, d.B, g.K), g.K, alpha0);
  const Matrix C = psd_sqrt(d.Q);
  c.L_detecting = certify_stability_pair(d.A - g.Kp * C, g.Kp, alpha0);
  c.norm_A = spectral_norm(d.A);
  c.norm_B = spectral_norm(d.B);
  c.norm_Q = spectral_norm(d.Q);
  c.norm_R = spectral_norm(d.R);
  c.min_eig_R = d.R.size() ? sym_eig_extremes(d.R).first : 1.0;
  if (!(c.min_eig_R > 0.0)) throw NumericalError("certify_regularity: R is not positive definite");
  c.rc.L = std::max({1.0 + 1e-6, c.L_stabilizing, c.L_detecting, c.norm_A, c.norm_B, c.norm_Q, c.norm_R});
  c.rc.alpha = alpha0;
  c.rc.gamma = std::min(c.min_eig_R, 1.0 - 1e-6);
  return c;
}

double log_decay_bound(const DecayConstants& dc, double d) {
  return dc.log_Upsilon + d * dc.rho.log_value;
}

double log_truncation_bound(const TruncationConstants& tc, double kappa) {
  return tc.log_Psi + kappa * tc.delta.log_value;
}

double log_regret_bound(const TruncationConstants& tc, const PerformanceConstant& pc, double kappa,
                        double x_norm) {
  return pc.log_Gamma + kappa * tc.delta.log_value + 2.0 * std::log(x_norm);
}

bool within_bound(double value, double log_bound, double slack) {
  return value <= std::exp(log_bound) + slack;
}

bool BoundReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const BoundCheck& e) { return e.pass; });
}

std::vector<int> BoundReport::violations() const {
  std::vector<int> v;
  for (const auto& e : entries)
    if (!e.pass) v.push_back(e.index);
  return v;
}

BoundReport verify_decay_bound(const DecayProfile& profile, const DecayConstants& dc, double slack) {
  BoundReport r;
  for (std::size_t d = 0; d < profile.max_norm.size(); ++d) {
    const double lb = log_decay_bound(dc, static_cast<double>(d));
    r.entries.push_back({static_cast<int>(d), profile.max_norm[d], lb,
                         within_bound(profile.max_norm[d], lb, slack)});
  }
  return r;
}

BoundReport verify_truncation_bound(const std::vector<double>& errors, const TruncationConstants& tc,
                                    double slack) {
  BoundReport r;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double lb = log_truncation_bound(tc, static_cast<double>(k));
    r.entries.push_back({static_cast<int>(k), errors[k], lb, within_bound(errors[k], lb, slack)});
  }
  return r;
}

BoundReport verify_loop_decay(const Matrix& Phi, const DecayConstants& dc, int tmax) {
  BoundReport r;
  Matrix M = Matrix::Identity(Phi.rows(), Phi.cols());
  for (int t = 0; t <= tmax; ++t) {
    const double n = spectral_norm(M);
    const double lb = log_decay_bound(dc, t);
    r.entries.push_back({t, n, lb, n == 0.0 || std::log(n) <= lb});
    M = (M * Phi).eval();
  }
  return r;
}

const char* to_string(RegretStatus s) {
  switch (s) {
    case RegretStatus::pass: return "pass";
    case RegretStatus::fail: return "fail";
    case RegretStatus::outside_hypothesis: return "outside-hypothesis";
    default: return "unstable";
  }
}

bool RegretReport::any_violation() const {
  return std::any_of(entries.begin(), entries.end(), [](const RegretEntry& e) {
    return e.status == RegretStatus::fail || e.status == RegretStatus::unstable;
  });
}

RegretReport verify_regret_bound(const std::vector<std::optional<double>>& gaps,
                                 const BoundConstants& b, double x_norm) {
  if (!(x_norm > 0.0)) throw InvalidArgument("verify_regret_bound: x_norm must be positive");
  RegretReport r;
  const double threshold = b.sc.kappa_bar_ceil();
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    RegretEntry e;
    e.kappa = static_cast<int>(k);
    e.gap = gaps[k];
    e.log_bound = log_regret_bound(b.tc, b.pc, static_cast<double>(k), x_norm);
    if (static_cast<double>(k) < threshold)
      e.status = RegretStatus::outside_hypothesis;
    else if (!e.gap)
      e.status = RegretStatus::unstable;
    else
      e.status = within_bound(*e.gap, e.log_bound, 0.0) ? RegretStatus::pass : RegretStatus::fail;
    r.entries.push_back(e);
  }
  return r;
}

}  // namespace netlqr
