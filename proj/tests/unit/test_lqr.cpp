#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "netlqr/errors.hpp"
#include "netlqr/lqr.hpp"
#include "netlqr/model.hpp"

using namespace netlqr;
using doctest::Approx;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

const double kGolden = (1 + std::sqrt(5.0)) / 2;

}  // namespace

TEST_CASE("scalar Riccati closed forms") {
  const DareSolution zero = solve_dare(scalar(0), scalar(1), scalar(1), scalar(1));
  CHECK(zero.P(0, 0) == Approx(1.0).epsilon(1e-12));
  CHECK(optimal_gain(scalar(0), scalar(1), scalar(1), zero.P)(0, 0) == 0.0);

  const DareSolution g = solve_dare(scalar(1), scalar(1), scalar(1), scalar(1));
  CHECK(std::abs(g.P(0, 0) - kGolden) <= 1e-10);
  CHECK(g.residual <= 1e-8 * std::max(1.0, g.P(0, 0)));
  const Matrix K = optimal_gain(scalar(1), scalar(1), scalar(1), g.P);
  CHECK(std::abs(K(0, 0) - (std::sqrt(5.0) - 1) / 2) <= 1e-10);
  CHECK(closed_loop(scalar(1), scalar(1), K)(0, 0) == Approx(0.381966).epsilon(1e-6));
}

TEST_CASE("closed loop with zero gain is the open loop") {
  const Matrix A = Matrix::Random(3, 3), B = Matrix::Random(3, 2);
  CHECK(closed_loop(A, B, Matrix::Zero(2, 3)) == A);
  CHECK_THROWS_AS(closed_loop(A, B, Matrix::Zero(3, 3)), InvalidArgument);
}

TEST_CASE("Riccati solution properties on the examples") {
  const Graph ring = build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  const EdgeWeights w{{{0, 1}, 1.0}, {{1, 2}, 0.5}, {{2, 3}, 1.5}, {{0, 3}, 0.8}};
  for (const auto& sys : {build_hvac(3, 3, 1.0, 0.05, 1.0, 1.0, 0.0), build_power(ring, w, 0.1, 1, 1, 0),
                          build_hvac(2, 2, 1.0, 0.05, 4.0, 4.0, 0.0)}) {
    const DenseSystem d = assemble_dense(sys);
    const DareSolution s = solve_dare(d.A, d.B, d.Q, d.R);
    CHECK(is_symmetric(s.P));
    CHECK(dare_residual(d.A, d.B, d.Q, d.R, s.P) <= 1e-8 * std::max(1.0, spectral_norm(s.P)));
    CHECK(sym_eig_extremes(Matrix(s.P - d.Q)).first >= -1e-8);

    const GainMatrix K = optimal_gain(sys, d, s.P);
    CHECK(spectral_radius(closed_loop(d.A, d.B, K.dense())) < 1.0);

    const Matrix Pk = cost_matrix(d, K.dense());
    CHECK(spectral_norm(Pk - s.P) <= 1e-7 * spectral_norm(s.P));
    CHECK(spectral_norm(cost_gap_matrix(d, s.P, K.dense(), K.dense())) == 0.0);
  }
}

TEST_CASE("decoupled systems give block diagonal gains") {
  NetworkedSystem s = make_system(build_graph(2, {{0, 1}}), {1, 1}, {1, 1});
  s.A[{0, 0}] = scalar(1.2);
  s.A[{1, 1}] = scalar(0.7);
  s.B[{0, 0}] = scalar(1);
  s.B[{1, 1}] = scalar(2);
  s.set_Q(0, 0, scalar(1));
  s.set_Q(1, 1, scalar(3));
  s.set_R(0, 0, scalar(1));
  s.set_R(1, 1, scalar(1));
  const DenseSystem d = assemble_dense(s);
  const GainMatrix K = optimal_gain(s, d, solve_dare(d.A, d.B, d.Q, d.R).P);
  CHECK(K.block(0, 1)(0, 0) == 0.0);
  CHECK(K.block(1, 0)(0, 0) == 0.0);
  CHECK(K.block(0, 0)(0, 0) > 0.0);
}

TEST_CASE("Riccati non-convergence") {
  const Graph g = build_graph(2, {{0, 1}});
  const NetworkedSystem blind = build_power_undersensed(g, {{{0, 1}, 1.0}}, 0.1, 1, 1, 0, {});
  const DenseSystem d = assemble_dense(blind);
  CHECK_THROWS_AS(solve_dare(d.A, d.B, d.Q, d.R), NonConvergence);

  // Unstable and uncontrollable.
  CHECK_THROWS_AS(solve_dare(scalar(2), scalar(0), scalar(1), scalar(1)), NonConvergence);
  DareOptions few;
  few.max_iter = 3;
  CHECK_THROWS_AS(solve_dare(scalar(1), scalar(1), scalar(1), scalar(1), few), NonConvergence);
  CHECK_THROWS_AS(solve_dare(scalar(1), scalar(1), scalar(1), scalar(-1)), NumericalError);

  // An unactuated zone keeps an observed integrator mode out of reach.
  const DenseSystem u = assemble_dense(build_hvac_underactuated(1, 4, 1.0, 0.05, 1.0, 1.0, 1.0, {1, 2}));
  CHECK_THROWS_AS(solve_dare(u.A, u.B, u.Q, u.R), NonConvergence);
}

TEST_CASE("discrete Lyapunov") {
  const Matrix M = Matrix::Identity(2, 2) * 3.0;
  CHECK(solve_discrete_lyapunov(Matrix::Zero(2, 2), M) == M);
  CHECK(solve_discrete_lyapunov(scalar(0.5), scalar(1))(0, 0) == Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(solve_discrete_lyapunov(scalar(1.0), scalar(1)), UnstableError);
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  CHECK_THROWS_AS(solve_discrete_lyapunov(rot, M), UnstableError);

  Matrix phi(3, 3);
  phi << 0.5, 0.2, 0.0, -0.1, 0.3, 0.4, 0.0, 0.1, -0.6;
  Matrix S(3, 3);
  S << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 1;
  const Matrix P = solve_discrete_lyapunov(phi, S);
  CHECK(lyapunov_residual(phi, S, P) <= 1e-8 * std::max(1.0, spectral_norm(P)));
}

TEST_CASE("rollout and accumulated cost") {
  Vector x0(2);
  x0 << 1.0, -2.0;
  const auto zero = simulate(Matrix::Zero(2, 2), x0, 3);
  REQUIRE(zero.size() == 4);
  CHECK(zero[0] == x0);
  for (int t = 1; t <= 3; ++t) CHECK(zero[t].isZero(0.0));
  CHECK(simulate(Matrix::Zero(2, 2), x0, 0).size() == 1);
  CHECK_THROWS_AS(simulate(Matrix::Zero(2, 2), x0, -1), InvalidArgument);

  const DareSolution g = solve_dare(scalar(1), scalar(1), scalar(1), scalar(1));
  const Matrix K = optimal_gain(scalar(1), scalar(1), scalar(1), g.P);
  const Matrix phi = closed_loop(scalar(1), scalar(1), K);
  const Vector one = Vector::Ones(1);
  double prev = 0.0;
  for (int T : {0, 1, 2, 5, 10, 40}) {
    const double c = accumulate_cost(simulate(phi, one, T), scalar(1), scalar(1), K);
    CHECK(c >= prev);
    CHECK(c <= 0.5 * g.P(0, 0) + 1e-12);
    prev = c;
  }
  CHECK(prev == Approx(kGolden / 2).epsilon(1e-12));
  CHECK(prev == Approx(0.809017).epsilon(1e-6));
}

TEST_CASE("cost of a stable open loop") {
  DenseSystem d{scalar(0.5), scalar(1), scalar(2), scalar(1)};
  CHECK(cost_matrix(d, scalar(0))(0, 0) == Approx(2.0 / 0.75));
  CHECK_THROWS_AS(cost_matrix(d, scalar(-1)), UnstableError);
}

TEST_CASE("gain matrix blocks") {
  Matrix dense = Matrix::Zero(3, 4);
  dense(0, 0) = 1;
  dense(2, 3) = 5;
  GainMatrix K(dense, {1, 2}, {2, 2});
  CHECK(K.num_present() == 4);
  CHECK(K.row_offset(1) == 1);
  CHECK(K.col_offset(1) == 2);
  CHECK(K.block(1, 1)(1, 1) == 5);
  K.remove_block(1, 1);
  CHECK_FALSE(K.present(1, 1));
  CHECK(K.dense()(2, 3) == 0.0);
  CHECK(K.num_present() == 3);
  CHECK_THROWS_AS(GainMatrix(dense, {1, 1}, {2, 2}), InvalidArgument);
}
