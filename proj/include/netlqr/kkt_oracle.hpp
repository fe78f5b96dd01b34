#pragma once

#include <string>
#include <utility>
#include <vector>

#include "netlqr/bounds.hpp"
#include "netlqr/graph.hpp"
#include "netlqr/lqr.hpp"
#include "netlqr/model.hpp"
#include "netlqr/truncation.hpp"

namespace netlqr {

inline constexpr int kKktMaxDim = 4000;
inline constexpr int kKktInverseMaxDim = 1500;

// Finite-horizon KKT matrix H = [[G, F'], [F, 0]] with
// z = [x(0); u(0); ...; x(T-1); u(T-1); x(T)] followed by lambda(0..T).
// F row block 0 is x(0) = xbar; row block t+1 is x(t+1) - A x(t) - B u(t) = 0.
struct KktSystem {
  Matrix H;
  Matrix G, F;
  Matrix P;
  DenseSystem sys;
  int T = 0;
  int nx = 0, nu = 0;
  std::vector<int> state_dims, input_dims;
  std::vector<int> state_offsets, input_offsets;

  int dim() const { return static_cast<int>(H.rows()); }
  int num_primal() const { return nx * (T + 1) + nu * T; }
  int num_nodes() const { return static_cast<int>(state_dims.size()); }
  int x_index(int t) const { return t * (nx + nu); }
  int u_index(int t) const { return t * (nx + nu) + nx; }
  int lambda_index(int t) const { return num_primal() + t * nx; }
};

inline int kkt_dimension(int nx, int nu, int T) { return 2 * nx * (T + 1) + nu * T; }

// Throws SizeGuardError beyond max_dim.
KktSystem build_kkt(const NetworkedSystem& sys, const Matrix& P, int T, int max_dim = kKktMaxDim);

// Gain with u(0) = -K xbar, one right-hand side per basis initial state.
GainMatrix extract_gain_from_kkt(const KktSystem& k, const NetworkedSystem& sys);

// Space-time graph on (t,i), node id t*n + i: spatial edges for t < T,
// temporal edges (t,i)-(t+1,i), and a clique at t = T.
struct SpaceTimeGraph {
  Graph graph;
  int T = 0;
  int n = 0;
  DistanceMatrix dist;
  int id(int t, int i) const { return t * n + i; }
};

SpaceTimeGraph space_time_graph(const Graph& g, int T);

// Pairs (i,j) with d_GT((0,i),(0,j)) != d_G(i,j).
std::vector<std::pair<int, int>> stage0_distance_mismatches(const DistanceMatrix& spatial,
                                                            const SpaceTimeGraph& st);

// same_stage: I_{t,i} = (x_i(t), u_i(t), lambda_i(t)).
// transition_stage: I_{t,i} = (x_i(t), u_i(t), lambda_i(t+1)), with lambda_i(0)
// joining stage 0.
enum class KktGrouping { same_stage, transition_stage };

const char* to_string(KktGrouping g);

std::vector<int> kkt_index_set(const KktSystem& k, int t, int i, KktGrouping grouping);

// Largest space-time distance between index sets with a nonzero block of H.
int kkt_bandwidth(const KktSystem& k, const SpaceTimeGraph& st, KktGrouping grouping);

struct KktBoundReport {
  double sigma_min = 0, sigma_max = 0;
  double block_norm_bound = 0;  // upper bound on sigma_max from block norms
  double gamma_H = 0, L_H = 0;
  double sigma_min_F_sq = 0, gamma_F = 0;
  double reduced_hessian_min = 0, gamma_G = 0;
  double min_eig_P_minus_Q = 0, max_eig_P = 0, L_P = 0;
  std::vector<std::string> hypothesis_failures;
  std::vector<std::string> bound_failures;
  bool hypothesis_ok() const { return hypothesis_failures.empty(); }
  bool bounds_ok() const { return bound_failures.empty(); }
};

// Hypotheses: ||A||,||B||,||Q||,||R|| <= L, R >= gamma I, Q <= P <= L_P I.
// Bounds: gamma_H - tol <= sigma(H) <= L_H + tol, plus the intermediate
// regularity bounds on F F' and the reduced Hessian.
KktBoundReport kkt_singular_bounds(const KktSystem& k, const RegularityConstants& rc,
                                   const DecayConstants& dc, double tol = 1e-9);

// Max spectral norm of (H^{-1})[I_{0,i}, I_{0,j}] per space-time distance,
// same_stage grouping. Throws SizeGuardError beyond kKktInverseMaxDim.
DecayProfile kkt_inverse_block_decay(const KktSystem& k, const SpaceTimeGraph& st);

}  // namespace netlqr
