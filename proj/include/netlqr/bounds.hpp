#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netlqr/numkernel.hpp"
#include "netlqr/truncation.hpp"

namespace netlqr {

struct NetworkedSystem;

// Positive constants are carried as natural logs; rates in (0,1) as the pair
// (log r, log(1 - r)).
struct UnitRate {
  double log_value = 0.0;       // log r
  double log_complement = 0.0;  // log(1 - r)

  double value() const;
  double complement() const;
  // Strictly inside (0,1) as far as the logs can tell.
  bool in_open_unit_interval() const;
};

double log_add(double a, double b);  // log(e^a + e^b)
double log_sum(std::initializer_list<double> terms);

struct RegularityConstants {
  double L = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
};

void check_regularity(const RegularityConstants& rc);

struct DecayConstants {
  double log_gamma_F = 0, log_gamma_G = 0, log_L_P = 0, log_L_H = 0;
  double log_mu_bar = 0, log_gamma_H = 0, log_Upsilon = 0;
  UnitRate rho;
  double log_one_minus_rho_sq = 0;

  double gamma_F() const;
  double gamma_G() const;
  double L_P() const;
  double L_H() const;
  double mu_bar() const;
  double gamma_H() const;
  double Upsilon() const;
};

DecayConstants decay_constants(const RegularityConstants& rc);

// Subexponential node-count bound p(d): either c (1 + d)^q or an explicit table.
struct GrowthFunction {
  enum class Kind { polynomial, table } kind = Kind::table;
  double c = 1.0;
  double q = 0.0;
  std::vector<double> table;

  static GrowthFunction polynomial(double c, double q);
  static GrowthFunction from_table(const std::vector<int>& profile);
  double log_at(double d) const;
};

struct TruncationConstants {
  UnitRate delta;
  double log_sup = 0;  // log sup_d p(d) (rho/delta)^d
  double log_Psi = 0;
  double sup_argmax = 0;  // maximizing d, possibly non-integer for the continuous bound
  bool sup_exact = true;  // false when the continuous maximum was used

  double Psi() const;
};

TruncationConstants truncation_constants(const DecayConstants& dc, const GrowthFunction& p);

struct StabilityConstants {
  UnitRate beta;
  double log_one_minus_beta_sq = 0;
  double log_Omega = 0;
  double log_kappa_bar = 0;  // -inf when kappa_bar is clamped to 0
  bool kappa_bar_clamped = false;

  double Omega() const;
  double kappa_bar() const;  // may be +inf
  // ceil(kappa_bar) as a double, +inf when beyond 2^53.
  double kappa_bar_ceil() const;
};

StabilityConstants stability_constants(const DecayConstants& dc, const TruncationConstants& tc,
                                       const RegularityConstants& rc);

struct PerformanceConstant {
  double log_Gamma = 0;
  double Gamma() const;
};

PerformanceConstant performance_constant(const DecayConstants& dc, const TruncationConstants& tc,
                                         const StabilityConstants& sc, const RegularityConstants& rc);

struct BoundConstants {
  RegularityConstants rc;
  DecayConstants dc;
  TruncationConstants tc;
  StabilityConstants sc;
  PerformanceConstant pc;
};

BoundConstants compute_bounds(const RegularityConstants& rc, const GrowthFunction& p);

// Range claims: rho, delta, beta in (0,1), Upsilon >= 1, L_H > 1, gamma_H < 1, delta > rho.
std::vector<std::string> range_violations(const BoundConstants& b);

// Regularity inputs built from the nilpotent certificate gains of a built-in
// example: L from certify_stability_pair on both loops and the system norms,
// gamma = min(lambda_min(R), 1 - 1e-6), alpha = alpha0.
struct Certification {
  RegularityConstants rc;
  double L_stabilizing = 0, L_detecting = 0;
  double norm_A = 0, norm_B = 0, norm_Q = 0, norm_R = 0;
  double min_eig_R = 0;
};

Certification certify_regularity(const NetworkedSystem& sys, double alpha0 = 0.5);

// log(U rho^d); compare in the log domain to avoid overflow.
double log_decay_bound(const DecayConstants& dc, double d);
double log_truncation_bound(const TruncationConstants& tc, double kappa);
double log_regret_bound(const TruncationConstants& tc, const PerformanceConstant& pc, double kappa,
                        double x_norm);

// value <= exp(log_bound) + slack
bool within_bound(double value, double log_bound, double slack);

struct BoundCheck {
  int index = 0;  // d or kappa
  double measured = 0;
  double log_bound = 0;
  bool pass = true;
};

struct BoundReport {
  std::vector<BoundCheck> entries;
  bool pass() const;
  std::vector<int> violations() const;
};

BoundReport verify_decay_bound(const DecayProfile& profile, const DecayConstants& dc,
                               double slack = 1e-9);
// errors[kappa] = ||K* - K^kappa||.
BoundReport verify_truncation_bound(const std::vector<double>& errors,
                                    const TruncationConstants& tc, double slack = 1e-9);
// ||Phi^t|| <= Upsilon rho^t for t = 0..tmax.
BoundReport verify_loop_decay(const Matrix& Phi, const DecayConstants& dc, int tmax = 50);

enum class RegretStatus { pass, fail, outside_hypothesis, unstable };
const char* to_string(RegretStatus s);

struct RegretEntry {
  int kappa = 0;
  std::optional<double> gap;  // measured J^kappa - J*, empty if the loop is unstable
  double log_bound = 0;
  RegretStatus status = RegretStatus::pass;
};

struct RegretReport {
  std::vector<RegretEntry> entries;
  bool any_violation() const;
};

// gaps[kappa] = worst-case J^kappa - J* over ||x|| <= x_norm.
RegretReport verify_regret_bound(const std::vector<std::optional<double>>& gaps,
                                 const BoundConstants& b, double x_norm = 1.0);

}  // namespace netlqr
