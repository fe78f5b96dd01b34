#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "netlqr/bounds.hpp"
#include "netlqr/errors.hpp"
#include "netlqr/model.hpp"

using namespace netlqr;
using doctest::Approx;

namespace {

// Plain double evaluation of the decay constants, usable while nothing under- or overflows.
struct Plain {
  double gF, gG, LP, LH, mu, gH, one_minus_rho_sq;
};

Plain plain(double L, double a, double g) {
  Plain p;
  p.gF = (1 - a) * (1 - a) / (L * L * (1 + L) * (1 + L));
  p.gG = (1 - a) * (1 - a) * g / (2 * std::pow(L, 4) * (1 + L) * (1 + L));
  p.LP = std::pow(L, 3) * (1 + L * L) / (1 - a * a);
  p.LH = std::max(2 * L + 1, p.LP + 1);
  p.mu = (2 * p.LH * p.LH / p.gG + p.gG + p.LH) / p.gF;
  p.gH = 1.0 / (2 / p.gG +
                (1 + 4 * p.LH / p.gG + 4 * p.LH * p.LH / (p.gG * p.gG)) * p.LH * (1 + p.mu * p.LH) / p.gF +
                p.mu);
  p.one_minus_rho_sq = 2 * p.gH * p.gH / (p.LH * p.LH + p.gH * p.gH);
  return p;
}

// Hand-set decay constants with the given rho and Upsilon.
DecayConstants manual(double rho, double upsilon, double L_P = 2.0) {
  DecayConstants dc;
  dc.rho.log_value = std::log(rho);
  dc.rho.log_complement = std::log1p(-rho);
  dc.log_one_minus_rho_sq = std::log1p(-rho * rho);
  dc.log_Upsilon = std::log(upsilon);
  dc.log_L_P = std::log(L_P);
  return dc;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("log helpers") {
  CHECK(log_add(std::log(2.0), std::log(3.0)) == Approx(std::log(5.0)));
  CHECK(log_add(-INFINITY, 1.5) == 1.5);
  CHECK(log_add(1000.0, 1000.0) == Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum({0.0, 0.0, 0.0, 0.0}) == Approx(std::log(4.0)));
  UnitRate r{std::log(0.25), std::log(0.75)};
  CHECK(r.value() == Approx(0.25));
  CHECK(r.complement() == Approx(0.75));
  CHECK(r.in_open_unit_interval());
  CHECK_FALSE(UnitRate{0.0, 0.0}.in_open_unit_interval());
  CHECK_FALSE(UnitRate{0.1, -1.0}.in_open_unit_interval());
}

TEST_CASE("regularity ranges") {
  CHECK_THROWS_AS(decay_constants({1.0, 0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(decay_constants({2.0, 1.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(decay_constants({2.0, 0.5, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(decay_constants({INFINITY, 0.5, 0.5}), InvalidArgument);
}

TEST_CASE("decay constants at L=2, alpha=0.5, gamma=0.5") {
  const DecayConstants dc = decay_constants({2.0, 0.5, 0.5});
  CHECK(dc.gamma_F() == Approx(1.0 / 144.0).epsilon(1e-12));
  CHECK(dc.gamma_G() == Approx(0.125 / 288.0).epsilon(1e-12));
  CHECK(dc.gamma_G() == Approx(4.3403e-4).epsilon(1e-4));
  CHECK(dc.L_P() == Approx(160.0 / 3.0).epsilon(1e-12));
  CHECK(dc.L_H() == Approx(160.0 / 3.0 + 1.0).epsilon(1e-12));
}

TEST_CASE("decay constants agree with plain evaluation") {
  for (double L : {1.05, 1.5, 2.0, 3.0})
    for (double a : {0.1, 0.5, 0.9})
      for (double g : {0.2, 0.9}) {
        const Plain p = plain(L, a, g);
        const DecayConstants dc = decay_constants({L, a, g});
        CHECK(rel(dc.gamma_F(), p.gF) < 1e-12);
        CHECK(rel(dc.gamma_G(), p.gG) < 1e-12);
        CHECK(rel(dc.L_P(), p.LP) < 1e-12);
        CHECK(rel(dc.L_H(), p.LH) < 1e-12);
        CHECK(rel(dc.mu_bar(), p.mu) < 1e-10);
        CHECK(rel(dc.gamma_H(), p.gH) < 1e-10);
        CHECK(std::abs(dc.log_one_minus_rho_sq - std::log(p.one_minus_rho_sq)) < 1e-10);
        // Upsilon = L_H / (gamma_H^2 rho), with rho one up to rounding here.
        CHECK(std::abs(dc.log_Upsilon - (std::log(p.LH) - 2 * std::log(p.gH))) < 1e-9);
      }
}

TEST_CASE("growth functions") {
  CHECK(GrowthFunction::polynomial(2.0, 1.0).log_at(3.0) == Approx(std::log(8.0)));
  const GrowthFunction t = GrowthFunction::from_table({1, 4, 0});
  CHECK(t.log_at(1) == Approx(std::log(4.0)));
  CHECK(t.log_at(2) == -INFINITY);
  CHECK(t.log_at(7) == -INFINITY);
  CHECK_THROWS_AS(GrowthFunction::from_table({}), InvalidArgument);
  CHECK_THROWS_AS(GrowthFunction::polynomial(0.0, 1.0), InvalidArgument);
}

TEST_CASE("truncation constants") {
  const DecayConstants dc = manual(0.5, 1.0);
  const TruncationConstants one = truncation_constants(dc, GrowthFunction::polynomial(1.0, 0.0));
  CHECK(one.delta.value() == Approx(0.75));
  CHECK(one.log_sup == Approx(0.0));
  CHECK(one.sup_argmax == 0.0);
  CHECK(one.Psi() == Approx(3.0));

  const DecayConstants dc7 = manual(0.5, 7.0);
  CHECK(truncation_constants(dc7, GrowthFunction::polynomial(1.0, 0.0)).Psi() == Approx(21.0));

  for (double rho : {0.1, 0.5, 0.99}) {
    const TruncationConstants two = truncation_constants(manual(rho, 1.0), GrowthFunction::polynomial(2.0, 0.0));
    CHECK(std::exp(two.log_sup) == Approx(2.0));
  }

  // Finite table: sup only over the listed distances.
  const std::vector<int> mesh = growth_profile(all_pairs_distances(build_mesh(10, 10)));
  const TruncationConstants tab = truncation_constants(dc, GrowthFunction::from_table(mesh));
  double best = 0.0;
  for (std::size_t d = 0; d < mesh.size(); ++d) best = std::max(best, mesh[d] * std::pow(0.5 / 0.75, d));
  CHECK(std::exp(tab.log_sup) == Approx(best).epsilon(1e-12));
  CHECK(tab.sup_argmax <= 18);
}

TEST_CASE("polynomial growth sup matches a brute-force scan") {
  for (double rho : {0.3, 0.8, 0.95})
    for (double q : {1.0, 2.0, 3.5}) {
      const DecayConstants dc = manual(rho, 1.0);
      const TruncationConstants tc = truncation_constants(dc, GrowthFunction::polynomial(1.5, q));
      const double ratio = rho / ((rho + 1) / 2);
      double best = 0.0;
      for (int d = 0; d < 20000; ++d) best = std::max(best, 1.5 * std::pow(1.0 + d, q) * std::pow(ratio, d));
      CHECK(tc.sup_exact);
      CHECK(std::exp(tc.log_sup) == Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("stability constants") {
  const DecayConstants dc = manual(0.5, 1.0);
  const RegularityConstants rc{1.5, 0.5, 0.5};
  const TruncationConstants tc = truncation_constants(dc, GrowthFunction::polynomial(1.0, 0.0));
  const StabilityConstants sc = stability_constants(dc, tc, rc);
  CHECK(sc.beta.value() == Approx(0.7905694).epsilon(1e-7));
  CHECK(sc.Omega() == Approx(std::sqrt(1.0 / 0.75)));

  DecayConstants zero = manual(0.5, 1.0);
  zero.log_one_minus_rho_sq = 0.0;  // rho = 0
  CHECK(stability_constants(zero, tc, rc).Omega() == Approx(1.0));

  // kappa_bar from its closed form.
  const double L = rc.L, g = rc.gamma, LP = dc.L_P(), Psi = tc.Psi(), U = 1.0, delta = 0.75;
  const double x = 0.75 / (2 * U * U * Psi * L * (L * Psi + 2 * L * (1 + LP * L * L / g)));
  CHECK(sc.kappa_bar() == Approx(std::log(x) / std::log(delta)).epsilon(1e-12));
  CHECK(sc.kappa_bar_ceil() == std::ceil(sc.kappa_bar()));

  // beta approaches 1 as rho does.
  double prev = 0.0;
  for (double rho : {0.5, 0.9, 0.99, 0.999999}) {
    const DecayConstants d = manual(rho, 1.0);
    const double b = stability_constants(d, truncation_constants(d, GrowthFunction::polynomial(1, 0)), rc)
                         .beta.value();
    CHECK(b > prev);
    CHECK(b < 1.0);
    prev = b;
  }
  CHECK(prev > 0.9999);
}

TEST_CASE("kappa_bar clamps at zero when the bound already holds") {
  DecayConstants dc = manual(0.5, 1.0, 1e-6);
  TruncationConstants tc = truncation_constants(dc, GrowthFunction::polynomial(1.0, 0.0));
  tc.log_Psi = std::log(1e-6);
  const StabilityConstants sc = stability_constants(dc, tc, {1.01, 0.5, 0.9});
  CHECK(sc.kappa_bar_clamped);
  CHECK(sc.kappa_bar() == 0.0);
  CHECK(sc.kappa_bar_ceil() == 0.0);
}

TEST_CASE("performance constant") {
  const RegularityConstants rc{1.5, 0.5, 0.5};
  const DecayConstants dc = manual(0.5, 2.0, 3.0);
  const TruncationConstants tc = truncation_constants(dc, GrowthFunction::polynomial(1.0, 0.0));
  const StabilityConstants sc = stability_constants(dc, tc, rc);
  const PerformanceConstant pc = performance_constant(dc, tc, sc, rc);
  const double L = 1.5, g = 0.5, LP = 3.0, Psi = tc.Psi(), Om = sc.Omega(), b = sc.beta.value();
  const double expect = Om * Om * L * Psi * ((1 + L * LP) * (2 * LP * L * L / g + Psi) + 2 * L * LP) / (1 - b * b);
  CHECK(pc.Gamma() == Approx(expect).epsilon(1e-12));
  CHECK(std::isfinite(pc.log_Gamma));
  CHECK(pc.Gamma() > 0.0);

  double prev = 0.0;
  for (double psi : {0.1, 1.0, 10.0, 1e3}) {
    TruncationConstants t = tc;
    t.log_Psi = std::log(psi);
    const double G = performance_constant(dc, t, sc, rc).Gamma();
    CHECK(G > prev);
    prev = G;
  }

  // Near-degenerate plug-in stays finite.
  const BoundConstants near = compute_bounds({1.0 + 1e-9, 1e-9, 1.0 - 1e-9}, GrowthFunction::polynomial(1, 0));
  CHECK(std::isfinite(near.pc.log_Gamma));
}

TEST_CASE("range claims hold on randomized valid inputs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double L = 1.0 + std::pow(10.0, -9.0 + 12.0 * unit(rng));
    const double a = std::min(std::max(unit(rng), 1e-12), 1.0 - 1e-12);
    const double g = std::min(std::max(unit(rng), 1e-12), 1.0 - 1e-12);
    const GrowthFunction p = trial % 2 ? GrowthFunction::polynomial(1 + 4 * unit(rng), 3 * unit(rng))
                                       : GrowthFunction::from_table({1, 4, 8, 12});
    const BoundConstants b = compute_bounds({L, a, g}, p);
    const auto v = range_violations(b);
    violations += static_cast<int>(!v.empty());
    CHECK(b.dc.log_L_H >= std::log(3.0));
    CHECK(b.dc.log_gamma_H < 0.0);
    CHECK(b.dc.log_Upsilon >= 0.0);
  }
  CHECK(violations == 0);
}

TEST_CASE("rho grows with alpha") {
  for (double L : {1.2, 2.0, 5.0})
    for (double g : {0.1, 0.7}) {
      double prev = 0.0;
      for (int i = 1; i < 20; ++i) {
        const double a = i / 20.0;
        const DecayConstants dc = decay_constants({L, a, g});
        // 1 - rho^2 shrinks, so rho grows.
        if (i > 1) CHECK(dc.log_one_minus_rho_sq < prev);
        prev = dc.log_one_minus_rho_sq;
      }
    }
}

TEST_CASE("certified constants of the examples") {
  const NetworkedSystem hvac = build_hvac(4, 4, 1.0, 0.05, 1.0, 1.0, 0.0);
  const Certification c = certify_regularity(hvac, 0.5);
  CHECK(c.rc.alpha == 0.5);
  CHECK(c.rc.gamma == Approx(1.0 - 1e-6));
  CHECK(c.rc.L >= c.norm_A);
  CHECK(c.rc.L >= c.L_stabilizing);
  CHECK(c.rc.L >= c.L_detecting);
  CHECK(c.rc.L > 1.0);
  CHECK_THROWS_AS(certify_regularity(build_hvac(2, 2, 1.0, 0.05, 0.0, 1.0, 0.0)), InvalidArgument);
}

TEST_CASE("bound checks") {
  const DecayConstants dc = manual(0.5, 2.0);
  DecayProfile below;
  below.max_norm = {2.0, 0.9, 0.4};
  CHECK(verify_decay_bound(below, dc).pass());
  DecayProfile above = below;
  above.max_norm[1] = 1.1;
  const BoundReport r = verify_decay_bound(above, dc);
  CHECK_FALSE(r.pass());
  CHECK(r.violations() == std::vector<int>{1});

  const TruncationConstants tc = truncation_constants(dc, GrowthFunction::polynomial(1.0, 0.0));
  CHECK(verify_truncation_bound({6.0, 4.5, 0.0}, tc).pass());
  CHECK(verify_truncation_bound({6.0, 4.6}, tc).violations() == std::vector<int>{1});

  Matrix phi = Matrix::Zero(2, 2);
  phi(0, 0) = 0.5;
  CHECK(verify_loop_decay(phi, dc, 50).pass());
  phi(0, 0) = 0.6;
  CHECK_FALSE(verify_loop_decay(phi, dc, 50).pass());
}

TEST_CASE("regret bound checks") {
  BoundConstants b;
  b.dc = manual(0.5, 1.0);
  b.tc = truncation_constants(b.dc, GrowthFunction::polynomial(1.0, 0.0));
  b.pc.log_Gamma = std::log(10.0);
  b.sc.kappa_bar_clamped = true;

  const RegretReport ok = verify_regret_bound({1.0, 0.5, 0.0}, b);
  CHECK_FALSE(ok.any_violation());
  for (const auto& e : ok.entries) CHECK(e.status == RegretStatus::pass);

  const RegretReport bad = verify_regret_bound({20.0, std::nullopt}, b);
  CHECK(bad.entries[0].status == RegretStatus::fail);
  CHECK(bad.entries[1].status == RegretStatus::unstable);
  CHECK(bad.any_violation());

  // kappa_bar beyond every kappa: nothing is inside the hypothesis.
  b.sc.kappa_bar_clamped = false;
  b.sc.log_kappa_bar = std::log(1e6);
  const RegretReport vac = verify_regret_bound({100.0, std::nullopt, 0.0}, b);
  CHECK_FALSE(vac.any_violation());
  for (const auto& e : vac.entries) CHECK(e.status == RegretStatus::outside_hypothesis);
  CHECK(std::string(to_string(RegretStatus::outside_hypothesis)) == "outside-hypothesis");
  CHECK_THROWS_AS(verify_regret_bound({0.0}, b, 0.0), InvalidArgument);
}
