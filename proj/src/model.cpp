#include "netlqr/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "netlqr/errors.hpp"
#include "netlqr/lqr.hpp"

namespace netlqr {

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::hvac: return "hvac";
    case ModelKind::power: return "power";
    default: return "custom";
  }
}

int NetworkedSystem::total_states() const {
  return std::accumulate(state_dims.begin(), state_dims.end(), 0);
}

int NetworkedSystem::total_inputs() const {
  return std::accumulate(input_dims.begin(), input_dims.end(), 0);
}

std::vector<int> NetworkedSystem::state_offsets() const {
  std::vector<int> off(state_dims.size(), 0);
  std::exclusive_scan(state_dims.begin(), state_dims.end(), off.begin(), 0);
  return off;
}

std::vector<int> NetworkedSystem::input_offsets() const {
  std::vector<int> off(input_dims.size(), 0);
  std::exclusive_scan(input_dims.begin(), input_dims.end(), off.begin(), 0);
  return off;
}

void NetworkedSystem::set_Q(int i, int j, const Matrix& m) {
  Q[{i, j}] = m;
  if (i != j) Q[{j, i}] = m.transpose();
}

void NetworkedSystem::set_R(int i, int j, const Matrix& m) {
  R[{i, j}] = m;
  if (i != j) R[{j, i}] = m.transpose();
}

NetworkedSystem make_system(const Graph& g, std::vector<int> state_dims,
                            std::vector<int> input_dims) {
  if (static_cast<int>(state_dims.size()) != g.num_nodes ||
      static_cast<int>(input_dims.size()) != g.num_nodes)
    throw InvalidArgument("make_system: per-node dimension lists must have one entry per node");
  for (std::size_t i = 0; i < state_dims.size(); ++i)
    if (state_dims[i] < 1 || input_dims[i] < 0)
      throw InvalidArgument("make_system: invalid dimension at node " + std::to_string(i + 1));
  NetworkedSystem s;
  s.graph = g;
  s.state_dims = std::move(state_dims);
  s.input_dims = std::move(input_dims);
  return s;
}

namespace {

void place(Matrix& dst, const BlockMap& blocks, const std::vector<int>& roff,
           const std::vector<int>& rdim, const std::vector<int>& coff, const std::vector<int>& cdim,
           const char* name) {
  const int n = static_cast<int>(rdim.size());
  for (const auto& [key, m] : blocks) {
    auto [i, j] = key;
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw InvalidArgument(std::string("assemble_dense: ") + name + " block index out of range");
    if (m.rows() != rdim[i] || m.cols() != cdim[j]) {
      std::ostringstream msg;
      msg << "assemble_dense: " << name << " block (" << i + 1 << "," << j + 1 << ") is " << m.rows()
          << "x" << m.cols() << ", expected " << rdim[i] << "x" << cdim[j];
      throw InvalidArgument(msg.str());
    }
    dst.block(roff[i], coff[j], rdim[i], cdim[j]) = m;
  }
}

}  // namespace

DenseSystem assemble_dense(const NetworkedSystem& sys) {
  const int nx = sys.total_states(), nu = sys.total_inputs();
  const auto xo = sys.state_offsets(), uo = sys.input_offsets();
  DenseSystem d{Matrix::Zero(nx, nx), Matrix::Zero(nx, nu), Matrix::Zero(nx, nx), Matrix::Zero(nu, nu)};
  place(d.A, sys.A, xo, sys.state_dims, xo, sys.state_dims, "A");
  place(d.B, sys.B, xo, sys.state_dims, uo, sys.input_dims, "B");
  place(d.Q, sys.Q, xo, sys.state_dims, xo, sys.state_dims, "Q");
  place(d.R, sys.R, uo, sys.input_dims, uo, sys.input_dims, "R");
  return d;
}

ValidationReport validate(const NetworkedSystem& sys) {
  ValidationReport rep;
  auto fail = [&](const std::string& s) { rep.failures.push_back(s); };
  DenseSystem d;
  try {
    d = assemble_dense(sys);
  } catch (const InvalidArgument& e) {
    rep.dims_ok = false;
    fail(e.what());
    return rep;
  }
  for (const auto* blocks : {&sys.A, &sys.B, &sys.Q, &sys.R}) {
    const char* name = blocks == &sys.A ? "A" : blocks == &sys.B ? "B" : blocks == &sys.Q ? "Q" : "R";
    for (const auto& [key, m] : *blocks) {
      auto [i, j] = key;
      if (i != j && !sys.graph.has_edge(i, j) && m.size() > 0 && !m.isZero(0.0)) {
        rep.sparsity_ok = false;
        fail(std::string("sparsity: nonzero ") + name + " block (" + std::to_string(i + 1) + "," +
             std::to_string(j + 1) + ") between non-adjacent nodes");
      }
    }
  }
  rep.norm_A = spectral_norm(d.A);
  rep.norm_B = spectral_norm(d.B);
  rep.norm_Q = spectral_norm(d.Q);
  rep.norm_R = spectral_norm(d.R);
  rep.q_symmetric = is_symmetric(d.Q);
  rep.r_symmetric = is_symmetric(d.R);
  if (!rep.q_symmetric) fail("Q is not symmetric");
  if (!rep.r_symmetric) fail("R is not symmetric");
  if (rep.q_symmetric) {
    rep.min_eig_Q = sym_eig_extremes(d.Q).first;
    rep.q_psd = rep.min_eig_Q >= -1e-10;
    if (!rep.q_psd) fail("Q is not positive semidefinite (min eigenvalue " + std::to_string(rep.min_eig_Q) + ")");
  }
  if (rep.r_symmetric && d.R.size() > 0) {
    rep.min_eig_R = sym_eig_extremes(d.R).first;
    rep.r_pd = rep.min_eig_R > 0.0;
    if (!rep.r_pd) fail("R is not positive definite (min eigenvalue " + std::to_string(rep.min_eig_R) + ")");
  }
  return rep;
}

namespace {

Matrix weighted_laplacian(const Graph& g, const EdgeWeights& k) {
  Matrix L = Matrix::Zero(g.num_nodes, g.num_nodes);
  for (auto [i, j] : g.edges) {
    const double w = edge_weight(k, i, j);
    if (!(w > 0.0) || !std::isfinite(w))
      throw InvalidArgument("edge weights must be positive and finite");
    L(i, j) -= w;
    L(j, i) -= w;
    L(i, i) += w;
    L(j, j) += w;
  }
  return L;
}

std::vector<bool> membership(int n, const std::vector<int>& nodes, const char* what) {
  std::vector<bool> in(n, false);
  for (int i : nodes) {
    if (i < 0 || i >= n) throw InvalidArgument(std::string(what) + " node out of range");
    in[i] = true;
  }
  return in;
}

NetworkedSystem build_example(ModelKind kind, const Graph& g, const EdgeWeights& k, double dt,
                              double eta1, double eta2, double eta3, std::vector<bool> actuated,
                              std::vector<bool> observed) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const int n = g.num_nodes;
  std::vector<int> udims(n);
  for (int i = 0; i < n; ++i) udims[i] = actuated[i] ? 1 : 0;
  NetworkedSystem s = make_system(g, std::vector<int>(n, 2), udims);
  s.kind = kind;
  s.params.dt = dt;
  s.params.eta1 = eta1;
  s.params.eta2 = eta2;
  s.params.eta3 = eta3;
  s.params.laplacian = weighted_laplacian(g, k);
  s.params.actuated = actuated;
  s.params.observed = observed;
  const Matrix& L = s.params.laplacian;
  for (int i = 0; i < n; ++i) {
    Matrix Aii(2, 2);
    if (kind == ModelKind::hvac)
      Aii << 1.0, dt, 0.0, 1.0 - dt * L(i, i);
    else
      Aii << 1.0, dt, -dt * L(i, i), 1.0;
    s.A[{i, i}] = Aii;
    for (int j : g.adjacency[i]) {
      Matrix Aij = Matrix::Zero(2, 2);
      if (kind == ModelKind::hvac)
        Aij(1, 1) = -dt * L(i, j);
      else
        Aij(1, 0) = -dt * L(i, j);
      s.A[{i, j}] = Aij;
    }
    if (actuated[i]) {
      Matrix Bii(2, 1);
      Bii << 0.0, eta1 * dt;
      s.B[{i, i}] = Bii;
      s.set_R(i, i, Matrix::Identity(1, 1));
    }
    if (observed[i]) {
      Matrix Qii = Matrix::Zero(2, 2);
      Qii(0, 0) = eta2 * eta2;
      Qii(1, 1) = eta3 * eta3;
      s.set_Q(i, i, Qii);
    }
  }
  return s;
}

EdgeWeights uniform_weights(const Graph& g, double k) {
  EdgeWeights w;
  for (auto e : g.edges) w[e] = k;
  return w;
}

}  // namespace

NetworkedSystem build_hvac_network(const Graph& g, const EdgeWeights& k, double dt, double eta1,
                                   double eta2, double eta3) {
  const int n = g.num_nodes;
  return build_example(ModelKind::hvac, g, k, dt, eta1, eta2, eta3, std::vector<bool>(n, true),
                       std::vector<bool>(n, true));
}

NetworkedSystem build_hvac(int rows, int cols, double dt, double k, double eta1, double eta2,
                           double eta3) {
  Graph g = build_mesh(rows, cols);
  return build_hvac_network(g, uniform_weights(g, k), dt, eta1, eta2, eta3);
}

NetworkedSystem build_power(const Graph& g, const EdgeWeights& k, double dt, double eta1,
                            double eta2, double eta3) {
  const int n = g.num_nodes;
  return build_example(ModelKind::power, g, k, dt, eta1, eta2, eta3, std::vector<bool>(n, true),
                       std::vector<bool>(n, true));
}

NetworkedSystem build_hvac_underactuated(int rows, int cols, double dt, double k, double eta1,
                                         double eta2, double eta3,
                                         const std::vector<int>& controlled) {
  Graph g = build_mesh(rows, cols);
  const int n = g.num_nodes;
  return build_example(ModelKind::hvac, g, uniform_weights(g, k), dt, eta1, eta2, eta3,
                       membership(n, controlled, "controlled"), std::vector<bool>(n, true));
}

NetworkedSystem build_power_undersensed(const Graph& g, const EdgeWeights& k, double dt,
                                        double eta1, double eta2, double eta3,
                                        const std::vector<int>& observed) {
  const int n = g.num_nodes;
  return build_example(ModelKind::power, g, k, dt, eta1, eta2, eta3, std::vector<bool>(n, true),
                       membership(n, observed, "observed"));
}

namespace {

void require_full_example(const NetworkedSystem& sys, ModelKind kind) {
  if (sys.kind != kind)
    throw InvalidArgument(std::string("nilpotent gain: system is not a ") + to_string(kind) + " model");
  const auto& p = sys.params;
  if (p.eta1 == 0.0) throw InvalidArgument("nilpotent gain: eta1 must be nonzero");
  if (p.eta2 == 0.0) throw InvalidArgument("nilpotent gain: eta2 must be nonzero");
  if (std::find(p.actuated.begin(), p.actuated.end(), false) != p.actuated.end())
    throw InvalidArgument("nilpotent gain: every node must be actuated");
  if (std::find(p.observed.begin(), p.observed.end(), false) != p.observed.end())
    throw InvalidArgument("nilpotent gain: every node must be observed");
}

// Stacked [first components; second components] to per-node interleaved order.
CertificateGains interleave(const Matrix& K_st, const Matrix& Kp_st, int n) {
  CertificateGains g{Matrix::Zero(n, 2 * n), Matrix::Zero(2 * n, 2 * n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < 2; ++c) {
        g.K(i, 2 * j + c) = K_st(i, c * n + j);
        for (int r = 0; r < 2; ++r) g.Kp(2 * i + r, 2 * j + c) = Kp_st(r * n + i, c * n + j);
      }
  return g;
}

}  // namespace

CertificateGains nilpotent_gain_hvac(const NetworkedSystem& sys) {
  require_full_example(sys, ModelKind::hvac);
  const auto& p = sys.params;
  const int n = sys.num_nodes();
  const double dt = p.dt, e1 = p.eta1, ae2 = std::abs(p.eta2);
  const Matrix I = Matrix::Identity(n, n);
  const Matrix M = I - dt * p.laplacian;
  Matrix K(n, 2 * n);
  K << I / (e1 * dt * dt), (2.0 * I - dt * p.laplacian) / (e1 * dt);
  Matrix Kp = Matrix::Zero(2 * n, 2 * n);
  Kp.topLeftCorner(n, n) = (I + M) / ae2;
  Kp.bottomLeftCorner(n, n) = (M * M) / (dt * ae2);
  return interleave(K, Kp, n);
}

CertificateGains nilpotent_gain_power(const NetworkedSystem& sys) {
  require_full_example(sys, ModelKind::power);
  const auto& p = sys.params;
  const int n = sys.num_nodes();
  const double dt = p.dt, e1 = p.eta1, ae2 = std::abs(p.eta2);
  const Matrix I = Matrix::Identity(n, n);
  Matrix K(n, 2 * n);
  K << I / (e1 * dt * dt) - p.laplacian / e1, 2.0 * I / (e1 * dt);
  Matrix Kp = Matrix::Zero(2 * n, 2 * n);
  Kp.topLeftCorner(n, n) = 2.0 * I / ae2;
  Kp.bottomLeftCorner(n, n) = I / (dt * ae2) - (dt / ae2) * p.laplacian;
  return interleave(K, Kp, n);
}

CertificateGains nilpotent_gain(const NetworkedSystem& sys) {
  switch (sys.kind) {
    case ModelKind::hvac: return nilpotent_gain_hvac(sys);
    case ModelKind::power: return nilpotent_gain_power(sys);
    default: throw InvalidArgument("nilpotent gain: only built-in example models are supported");
  }
}

double certify_stability_pair(const Matrix& phi, const Matrix& kbar, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("certify_stability_pair: alpha must be in (0,1)");
  if (phi.rows() != phi.cols()) throw InvalidArgument("certify_stability_pair: phi is not square");
  const double sr = spectral_radius(phi);
  if (!(sr < alpha)) {
    std::ostringstream msg;
    msg << "certify_stability_pair: spectral radius " << sr << " is not below alpha " << alpha;
    throw NonConvergence(msg.str());
  }
  double L = std::max(1.0 + 1e-6, kbar.size() ? spectral_norm(kbar) : 0.0);
  double sup = 1.0;  // t = 0
  const Matrix S = phi / alpha;
  Matrix Mt = Matrix::Identity(phi.rows(), phi.cols());  // phi^t / alpha^t
  const int cap = 100000;
  for (int t = 1; t <= cap; ++t) {
    Mt = (Mt * S).eval();
    if (Mt.isZero(0.0)) return std::max(L, sup);
    const double ratio = spectral_norm(Mt);
    if (!std::isfinite(ratio)) break;
    sup = std::max(sup, ratio);
    const double raw = ratio * std::pow(alpha, t);
    if (raw < 1e-14 && ratio < 1e-14 * sup) return std::max(L, sup);
  }
  throw NonConvergence("certify_stability_pair: supremum did not settle within the iteration cap");
}

Partition make_partition(std::vector<std::vector<int>> blocks, int num_nodes) {
  std::vector<int> owner(num_nodes, -1);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].empty()) throw InvalidArgument("partition: empty block");
    std::sort(blocks[k].begin(), blocks[k].end());
    for (int i : blocks[k]) {
      if (i < 0 || i >= num_nodes) throw InvalidArgument("partition: node out of range");
      if (owner[i] != -1) throw InvalidArgument("partition: node " + std::to_string(i + 1) + " in two blocks");
      owner[i] = static_cast<int>(k);
    }
  }
  for (int i = 0; i < num_nodes; ++i)
    if (owner[i] == -1) throw InvalidArgument("partition: node " + std::to_string(i + 1) + " not covered");
  return Partition{std::move(blocks)};
}

Partition trivial_partition(int num_nodes) {
  std::vector<int> all(num_nodes);
  std::iota(all.begin(), all.end(), 0);
  return make_partition({all}, num_nodes);
}

bool UniformityReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const UniformityCheck& c) { return c.pass; });
}

namespace {

std::vector<int> expand(const std::vector<int>& nodes, const std::vector<int>& off,
                        const std::vector<int>& dims) {
  std::vector<int> idx;
  for (int i : nodes)
    for (int c = 0; c < dims[i]; ++c) idx.push_back(off[i] + c);
  return idx;
}

Matrix sub(const Matrix& m, const std::vector<int>& r, const std::vector<int>& c) {
  Matrix out(r.size(), c.size());
  for (std::size_t a = 0; a < r.size(); ++a)
    for (std::size_t b = 0; b < c.size(); ++b) out(a, b) = m(r[a], c[b]);
  return out;
}

double norm_or_zero(const Matrix& m) { return m.size() ? spectral_norm(m) : 0.0; }

// Gain K with sr(A - B K) < alpha, from the DARE of the alpha-scaled pair.
Matrix block_stabilizer(const Matrix& A, const Matrix& B, double alpha) {
  const Matrix As = A / alpha, Bs = B / alpha;
  const auto n = A.rows(), m = B.cols();
  DareSolution sol = solve_dare(As, Bs, Matrix::Identity(n, n), Matrix::Identity(m, m));
  return optimal_gain(As, Bs, Matrix::Identity(m, m), sol.P);
}

// Least-squares X with M X = Y; returns residual spectral norm.
double lsq(const Matrix& M, const Matrix& Y, Matrix& X) {
  if (M.cols() == 0) {
    X = Matrix::Zero(0, Y.cols());
    return norm_or_zero(Y);
  }
  X = M.completeOrthogonalDecomposition().solve(Y);
  return norm_or_zero(M * X - Y);
}

}  // namespace

UniformityReport check_uniform_conditions(const NetworkedSystem& sys, const Partition& part,
                                          double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw InvalidArgument("alpha0 must be in (0,1)");
  const int n = sys.num_nodes();
  make_partition(part.blocks, n);
  const DenseSystem d = assemble_dense(sys);
  const auto xo = sys.state_offsets(), uo = sys.input_offsets();
  const int nb = static_cast<int>(part.blocks.size());
  std::vector<std::vector<int>> S(nb), U(nb);
  std::vector<int> owner(n);
  for (int k = 0; k < nb; ++k) {
    S[k] = expand(part.blocks[k], xo, sys.state_dims);
    U[k] = expand(part.blocks[k], uo, sys.input_dims);
    for (int i : part.blocks[k]) owner[i] = k;
  }

  UniformityReport rep;
  rep.alpha0 = alpha0;
  double L0 = 1.0 + 1e-6;
  auto add = [&](char cond, bool pass, int k, int k2, double v, std::string detail) {
    rep.checks.push_back(UniformityCheck{cond, pass, k, k2, v, std::move(detail)});
  };

  // (a) and (b)
  bool a_ok = true;
  for (int k = 0; k < nb; ++k)
    for (int k2 = 0; k2 < nb; ++k2) {
      const Matrix Qb = sub(d.Q, S[k], S[k2]), Rb = sub(d.R, U[k], U[k2]);
      const Matrix Ab = sub(d.A, S[k], S[k2]), Bb = sub(d.B, S[k], U[k2]);
      if (k != k2) {
        const double q = Qb.size() ? Qb.cwiseAbs().maxCoeff() : 0.0;
        const double r = Rb.size() ? Rb.cwiseAbs().maxCoeff() : 0.0;
        const double b = Bb.size() ? Bb.cwiseAbs().maxCoeff() : 0.0;
        const double worst = std::max({q, r, b});
        if (worst != 0.0) {
          a_ok = false;
          add('a', false, k, k2, worst, "nonzero cross-block Q, R or B");
        }
      }
      L0 = std::max({L0, norm_or_zero(Qb), norm_or_zero(Rb), norm_or_zero(Ab), norm_or_zero(Bb)});
    }
  if (a_ok) add('a', true, -1, -1, 0.0, "cross-block Q, R, B are zero");

  // (c)
  double gamma0 = std::numeric_limits<double>::infinity();
  bool c_ok = true;
  for (int k = 0; k < nb; ++k) {
    if (U[k].empty()) continue;
    const double lmin = sym_eig_extremes(sub(d.R, U[k], U[k])).first;
    gamma0 = std::min(gamma0, lmin);
    if (!(lmin > 0.0)) {
      c_ok = false;
      add('c', false, k, -1, lmin, "R block is not positive definite");
    }
  }
  if (!std::isfinite(gamma0)) gamma0 = 1.0;
  rep.gamma0 = std::min(gamma0, 1.0 - 1e-6);
  if (c_ok) add('c', true, -1, -1, gamma0, "min eigenvalue of diagonal R blocks");

  // (d) stabilizability and one-step coupling rejection
  bool d_ok = true;
  for (int k = 0; k < nb; ++k) {
    const Matrix Akk = sub(d.A, S[k], S[k]), Bkk = sub(d.B, S[k], U[k]);
    try {
      const Matrix K = block_stabilizer(Akk, Bkk, alpha0);
      const double Lk = certify_stability_pair(closed_loop(Akk, Bkk, K), K, alpha0);
      L0 = std::max(L0, Lk);
    } catch (const Error& e) {
      d_ok = false;
      add('d', false, k, -1, 0.0, std::string("block not stabilizable: ") + e.what());
    }
    for (int k2 = 0; k2 < nb; ++k2) {
      if (k2 == k) continue;
      const Matrix Akk2 = sub(d.A, S[k], S[k2]);
      if (Akk2.isZero(0.0)) continue;
      Matrix Kbar;
      const double res = lsq(Bkk, Akk2, Kbar);
      if (res > 1e-8) {
        d_ok = false;
        add('d', false, k, k2, res, "coupling not in the range of the block input matrix");
      } else {
        L0 = std::max(L0, norm_or_zero(Kbar));
      }
    }
  }
  if (d_ok) add('d', true, -1, -1, 0.0, "blocks stabilizable, coupling rejectable");

  // (e) detectability and one-step coupling filtering
  bool e_ok = true;
  for (int k = 0; k < nb; ++k) {
    const Matrix Akk = sub(d.A, S[k], S[k]), Qkk = sub(d.Q, S[k], S[k]);
    Matrix C;
    try {
      C = psd_sqrt(Qkk);
    } catch (const Error& e) {
      e_ok = false;
      add('e', false, k, -1, 0.0, std::string("Q block is not positive semidefinite: ") + e.what());
      continue;
    }
    try {
      const Matrix Kd = block_stabilizer(Akk.transpose(), C.transpose(), alpha0);
      const Matrix Kp = Kd.transpose();
      const double Lk = certify_stability_pair(Akk - Kp * C, Kp, alpha0);
      L0 = std::max(L0, Lk);
    } catch (const Error& e) {
      e_ok = false;
      add('e', false, k, -1, 0.0, std::string("block not detectable: ") + e.what());
    }
    for (int k2 = 0; k2 < nb; ++k2) {
      if (k2 == k) continue;
      const Matrix Ak2k = sub(d.A, S[k2], S[k]);
      if (Ak2k.isZero(0.0)) continue;
      Matrix KpT;
      const double res = lsq(C.transpose(), Ak2k.transpose(), KpT);
      if (res > 1e-8) {
        e_ok = false;
        add('e', false, k2, k, res, "coupling not filterable through the observed states");
      } else {
        L0 = std::max(L0, norm_or_zero(KpT));
      }
    }
  }
  if (e_ok) add('e', true, -1, -1, 0.0, "blocks detectable, coupling filterable");

  // neighbor-block count
  int D = 0;
  for (int k = 0; k < nb; ++k) {
    std::set<int> nbrs{k};
    for (int i : part.blocks[k])
      for (int j : sys.graph.adjacency[i]) nbrs.insert(owner[j]);
    D = std::max(D, static_cast<int>(nbrs.size()));
  }
  rep.D = D;
  add('D', true, -1, -1, D, "max number of blocks adjacent to a block");

  rep.L0 = L0;
  if (rep.pass()) {
    rep.L = L0 * D;
    rep.gamma = rep.gamma0;
    rep.alpha = alpha0;
  }
  return rep;
}

}  // namespace netlqr
