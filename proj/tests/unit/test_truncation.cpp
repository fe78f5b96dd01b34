#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "netlqr/errors.hpp"
#include "netlqr/model.hpp"
#include "netlqr/truncation.hpp"

using namespace netlqr;
using doctest::Approx;

namespace {

struct Instance {
  NetworkedSystem sys;
  DistanceMatrix dist;
  GainMatrix K;
};

Instance solve(NetworkedSystem sys) {
  const DenseSystem d = assemble_dense(sys);
  const DareSolution s = solve_dare(d.A, d.B, d.Q, d.R);
  Instance in{sys, all_pairs_distances(sys.graph), {}};
  in.K = optimal_gain(sys, d, s.P);
  return in;
}

GainMatrix path_gain(int n) {
  Matrix dense = Matrix::Constant(n, n, 1.0);
  return GainMatrix(dense, std::vector<int>(n, 1), std::vector<int>(n, 1));
}

}  // namespace

TEST_CASE("truncation patterns") {
  const int n = 5;
  const DistanceMatrix dist = all_pairs_distances(build_mesh(1, n));
  const GainMatrix K = path_gain(n);

  const GainMatrix full = truncate_gain(K, dist, 4);
  CHECK(full.dense() == K.dense());
  CHECK(truncation_error(K, full).absolute == 0.0);

  const GainMatrix diag = truncate_gain(K, dist, 0);
  CHECK(diag.dense() == Matrix::Identity(n, n));
  CHECK(diag.num_present() == static_cast<std::size_t>(n));

  const GainMatrix tri = truncate_gain(K, dist, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(tri.dense()(i, j) == (std::abs(i - j) <= 1 ? 1.0 : 0.0));

  CHECK_THROWS_AS(truncate_gain(K, dist, -1), InvalidArgument);
}

TEST_CASE("unreachable pairs are always truncated") {
  const DistanceMatrix dist = all_pairs_distances(build_graph(3, {{0, 1}}));
  const GainMatrix t = truncate_gain(path_gain(3), dist, 100);
  CHECK(t.dense()(0, 2) == 0.0);
  CHECK(t.dense()(1, 0) == 1.0);
}

TEST_CASE("truncation error values") {
  const DistanceMatrix dist = all_pairs_distances(build_mesh(1, 3));
  const GainMatrix K = path_gain(3);
  const TruncationError same = truncation_error(K, K);
  CHECK(same.absolute == 0.0);
  REQUIRE(same.relative);
  CHECK(*same.relative == 0.0);

  const TruncationError off = truncation_error(K, truncate_gain(K, dist, 1));
  CHECK(off.absolute == Approx(1.0));  // two unit corner entries, norm 1
  CHECK(*off.relative == Approx(1.0 / 3.0));

  const GainMatrix zero(Matrix::Zero(3, 3), {1, 1, 1}, {1, 1, 1});
  const TruncationError z = truncation_error(zero, zero);
  CHECK_FALSE(z.relative);
  CHECK(z.absolute == 0.0);
}

TEST_CASE("nested truncations") {
  const Instance in = solve(build_hvac(3, 4, 1.0, 0.05, 1.0, 1.0, 0.0));
  const int diam = diameter(in.dist);
  for (int k1 = 0; k1 <= diam; ++k1)
    for (int k2 = 0; k2 <= k1; ++k2) {
      const GainMatrix a = truncate_gain(truncate_gain(in.K, in.dist, k1), in.dist, k2);
      CHECK(a.dense() == truncate_gain(in.K, in.dist, k2).dense());
    }
}

TEST_CASE("truncation error decreases with kappa") {
  const Graph g = build_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {0, 3}});
  EdgeWeights w;
  double v = 0.6;
  for (auto e : g.edges) w[e] = (v += 0.15);
  for (const auto& sys : {build_hvac(4, 4, 1.0, 0.05, 1.0, 1.0, 0.0), build_power(g, w, 0.1, 1, 1, 0)}) {
    const Instance in = solve(sys);
    const int diam = diameter(in.dist);
    double prev = INFINITY;
    for (int k = 0; k <= diam; ++k) {
      const TruncationError e = truncation_error(in.K, truncate_gain(in.K, in.dist, k));
      CHECK(e.absolute <= prev + 1e-12);
      prev = e.absolute;
      if (k == diam) CHECK(e.absolute == 0.0);
      if (k == diam - 1) CHECK(e.absolute > 0.0);
    }
  }
}

TEST_CASE("block norm profile") {
  const Instance one = solve(build_hvac(1, 1, 1.0, 0.05, 1.0, 1.0, 0.0));
  const DecayProfile p1 = block_norm_profile(one.K, one.dist);
  CHECK(p1.max_norm.size() == 1);
  CHECK(p1.pair_count[0] == 1);
  CHECK_FALSE(p1.rho_emp);

  Matrix dense = Matrix::Identity(3, 3) * 2.0;
  const GainMatrix diag(dense, {1, 1, 1}, {1, 1, 1});
  const DecayProfile pd = block_norm_profile(diag, all_pairs_distances(build_mesh(1, 3)));
  CHECK(pd.max_norm[0] == 2.0);
  CHECK(pd.max_norm[1] == 0.0);
  CHECK(pd.max_norm[2] == 0.0);
  CHECK(pd.pair_count[1] == 4);
  CHECK(pd.pair_count[2] == 2);

  const Instance mesh = solve(build_hvac(5, 5, 1.0, 0.05, 1.0, 1.0, 0.0));
  const DecayProfile pm = block_norm_profile(mesh.K, mesh.dist);
  CHECK(pm.max_norm.size() == 9);
  for (std::size_t d = 2; d < pm.max_norm.size(); ++d)
    if (pm.max_norm[d] > kNormFloor) CHECK(pm.max_norm[d] < pm.max_norm[d - 1]);
  REQUIRE(pm.rho_emp);
  CHECK(*pm.rho_emp > 0.0);
  CHECK(*pm.rho_emp < 1.0);
}

TEST_CASE("decay fit") {
  std::vector<double> exact;
  for (int d = 0; d < 10; ++d) exact.push_back(3.0 * std::pow(0.4, d));
  const DecayFit f = fit_decay(exact);
  CHECK(f.upsilon == Approx(3.0).epsilon(1e-9));
  CHECK(f.rho == Approx(0.4).epsilon(1e-9));
  CHECK(f.slope == Approx(std::log(0.4)).epsilon(1e-9));
  CHECK(f.points == 10);

  const DecayFit flat = fit_decay(std::vector<double>{2.0, 2.0, 2.0});
  CHECK(flat.rho == Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(fit_decay(std::vector<double>{1.0, 0.0, 1e-20}), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(std::vector<double>{}), InvalidArgument);

  // Entries under the floor are skipped, not fitted as log noise.
  const DecayFit skip = fit_decay(std::vector<double>{1.0, 0.5, 1e-16, 0.125});
  CHECK(skip.points == 3);
  CHECK(skip.rho == Approx(0.5).epsilon(1e-9));
}
