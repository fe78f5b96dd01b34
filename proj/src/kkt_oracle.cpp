#include "netlqr/kkt_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "netlqr/errors.hpp"

namespace netlqr {

KktSystem build_kkt(const NetworkedSystem& sys, const Matrix& P, int T, int max_dim) {
  if (T < 1) throw InvalidArgument("build_kkt: horizon must be at least 1");
  KktSystem k;
  k.sys = assemble_dense(sys);
  k.nx = sys.total_states();
  k.nu = sys.total_inputs();
  if (P.rows() != k.nx || P.cols() != k.nx)
    throw InvalidArgument("build_kkt: terminal cost has the wrong dimension");
  if (!is_symmetric(P, kSymmetryTol * std::max(1.0, P.cwiseAbs().maxCoeff())))
    throw NumericalError("build_kkt: terminal cost is not symmetric");
  const int dim = kkt_dimension(k.nx, k.nu, T);
  if (dim > max_dim)
    throw SizeGuardError("KKT dimension " + std::to_string(dim) + " exceeds the limit " +
                         std::to_string(max_dim));
  k.T = T;
  k.P = P;
  k.state_dims = sys.state_dims;
  k.input_dims = sys.input_dims;
  k.state_offsets = sys.state_offsets();
  k.input_offsets = sys.input_offsets();

  const int np = k.num_primal(), nx = k.nx, nu = k.nu;
  k.G = Matrix::Zero(np, np);
  k.F = Matrix::Zero(nx * (T + 1), np);
  for (int t = 0; t < T; ++t) {
    k.G.block(k.x_index(t), k.x_index(t), nx, nx) = k.sys.Q;
    k.G.block(k.u_index(t), k.u_index(t), nu, nu) = k.sys.R;
  }
  k.G.block(k.x_index(T), k.x_index(T), nx, nx) = P;
  k.F.block(0, 0, nx, nx).setIdentity();
  for (int t = 0; t < T; ++t) {
    const int r = (t + 1) * nx;
    k.F.block(r, k.x_index(t), nx, nx) = -k.sys.A;
    k.F.block(r, k.u_index(t), nx, nu) = -k.sys.B;
    k.F.block(r, k.x_index(t + 1), nx, nx).setIdentity();
  }
  k.H = Matrix::Zero(dim, dim);
  k.H.topLeftCorner(np, np) = k.G;
  k.H.bottomLeftCorner(nx * (T + 1), np) = k.F;
  k.H.topRightCorner(np, nx * (T + 1)) = k.F.transpose();
  return k;
}

GainMatrix extract_gain_from_kkt(const KktSystem& k, const NetworkedSystem& sys) {
  Matrix rhs = Matrix::Zero(k.dim(), k.nx);
  rhs.block(k.lambda_index(0), 0, k.nx, k.nx).setIdentity();
  const Matrix sol = solve_linear(k.H, rhs);
  Matrix K = -sol.block(k.u_index(0), 0, k.nu, k.nx);
  return gain_from_dense(sys, std::move(K));
}

SpaceTimeGraph space_time_graph(const Graph& g, int T) {
  if (T < 1) throw InvalidArgument("space_time_graph: horizon must be at least 1");
  SpaceTimeGraph st;
  st.T = T;
  st.n = g.num_nodes;
  std::vector<std::pair<int, int>> edges;
  for (int t = 0; t < T; ++t)
    for (auto [i, j] : g.edges) edges.emplace_back(st.id(t, i), st.id(t, j));
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < st.n; ++i) edges.emplace_back(st.id(t, i), st.id(t + 1, i));
  for (int i = 0; i < st.n; ++i)
    for (int j = i + 1; j < st.n; ++j) edges.emplace_back(st.id(T, i), st.id(T, j));
  st.graph = build_graph((T + 1) * st.n, edges);
  st.dist = all_pairs_distances(st.graph);
  return st;
}

std::vector<std::pair<int, int>> stage0_distance_mismatches(const DistanceMatrix& spatial,
                                                            const SpaceTimeGraph& st) {
  if (spatial.size() != st.n) throw InvalidArgument("stage0_distance_mismatches: size mismatch");
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < st.n; ++i)
    for (int j = 0; j < st.n; ++j)
      if (spatial(i, j) != st.dist(st.id(0, i), st.id(0, j))) out.emplace_back(i, j);
  return out;
}

const char* to_string(KktGrouping g) {
  return g == KktGrouping::same_stage ? "same_stage" : "transition_stage";
}

std::vector<int> kkt_index_set(const KktSystem& k, int t, int i, KktGrouping grouping) {
  if (t < 0 || t > k.T || i < 0 || i >= k.num_nodes())
    throw InvalidArgument("kkt_index_set: (t,i) out of range");
  std::vector<int> idx;
  auto append = [&](int start, int len) {
    for (int r = 0; r < len; ++r) idx.push_back(start + r);
  };
  const int xo = k.state_offsets[i], nxi = k.state_dims[i];
  append(k.x_index(t) + xo, nxi);
  if (t < k.T) append(k.u_index(t) + k.input_offsets[i], k.input_dims[i]);
  if (grouping == KktGrouping::same_stage) {
    append(k.lambda_index(t) + xo, nxi);
  } else {
    if (t == 0) append(k.lambda_index(0) + xo, nxi);
    if (t < k.T) append(k.lambda_index(t + 1) + xo, nxi);
  }
  return idx;
}

namespace {

struct Group {
  int node;  // space-time id
  std::vector<int> idx;
};

std::vector<Group> all_groups(const KktSystem& k, const SpaceTimeGraph& st, KktGrouping grouping) {
  if (st.T != k.T || st.n != k.num_nodes())
    throw InvalidArgument("space-time graph does not match the KKT system");
  std::vector<Group> groups;
  for (int t = 0; t <= k.T; ++t)
    for (int i = 0; i < k.num_nodes(); ++i) groups.push_back({st.id(t, i), kkt_index_set(k, t, i, grouping)});
  return groups;
}

}  // namespace

int kkt_bandwidth(const KktSystem& k, const SpaceTimeGraph& st, KktGrouping grouping) {
  const auto groups = all_groups(k, st, grouping);
  std::vector<int> owner(k.dim(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int r : groups[g].idx) owner[r] = static_cast<int>(g);
  int bw = 0;
  for (int r = 0; r < k.dim(); ++r)
    for (int c = 0; c < k.dim(); ++c) {
      if (k.H(r, c) == 0.0) continue;
      const int d = st.dist(groups[owner[r]].node, groups[owner[c]].node);
      if (d == kUnreachable) return std::numeric_limits<int>::max();
      bw = std::max(bw, d);
    }
  return bw;
}

KktBoundReport kkt_singular_bounds(const KktSystem& k, const RegularityConstants& rc,
                                   const DecayConstants& dc, double tol) {
  check_regularity(rc);
  KktBoundReport r;
  r.gamma_H = dc.gamma_H();
  r.L_H = dc.L_H();
  r.gamma_F = dc.gamma_F();
  r.gamma_G = dc.gamma_G();
  r.L_P = dc.L_P();

  auto hyp = [&](bool ok, const std::string& what) {
    if (!ok) r.hypothesis_failures.push_back(what);
  };
  const double nA = spectral_norm(k.sys.A), nB = spectral_norm(k.sys.B);
  const double nQ = spectral_norm(k.sys.Q), nR = spectral_norm(k.sys.R);
  hyp(nA <= rc.L + tol, "||A|| exceeds L");
  hyp(nB <= rc.L + tol, "||B|| exceeds L");
  hyp(nQ <= rc.L + tol, "||Q|| exceeds L");
  hyp(nR <= rc.L + tol, "||R|| exceeds L");
  if (k.nu > 0) hyp(sym_eig_extremes(k.sys.R).first >= rc.gamma - tol, "lambda_min(R) below gamma");
  const Matrix PmQ = 0.5 * ((k.P - k.sys.Q) + (k.P - k.sys.Q).transpose());
  r.min_eig_P_minus_Q = sym_eig_extremes(PmQ).first;
  r.max_eig_P = sym_eig_extremes(0.5 * (k.P + k.P.transpose())).second;
  hyp(r.min_eig_P_minus_Q >= -1e-8 * std::max(1.0, r.max_eig_P), "P - Q is not PSD");
  hyp(r.max_eig_P <= r.L_P * (1 + 1e-12) + tol, "lambda_max(P) exceeds L_P");

  Eigen::BDCSVD<Matrix> svd(k.H);
  const auto& s = svd.singularValues();
  r.sigma_max = s(0);
  r.sigma_min = s(s.size() - 1);
  std::vector<int> sizes;
  for (int t = 0; t <= k.T; ++t) {
    sizes.push_back(k.nx);
    if (t < k.T) sizes.push_back(k.nu);
  }
  for (int t = 0; t <= k.T; ++t) sizes.push_back(k.nx);
  sizes.erase(std::remove(sizes.begin(), sizes.end(), 0), sizes.end());
  r.block_norm_bound = block_norm_bound(k.H, sizes, sizes);

  r.sigma_min_F_sq = std::pow(singular_value_extremes(k.F).first, 2);
  if (k.nu > 0) {
    // Null space of F: x(0) = 0 and x(t+1) = A x(t) + B u(t) with free inputs.
    const int np = k.num_primal(), m = k.nu * k.T;
    Matrix Z = Matrix::Zero(np, m);
    for (int s0 = 0; s0 < k.T; ++s0)
      for (int c = 0; c < k.nu; ++c) {
        const int col = s0 * k.nu + c;
        Z(k.u_index(s0) + c, col) = 1.0;
        Vector x = k.sys.B.col(c);
        for (int t = s0 + 1; t <= k.T; ++t) {
          Z.block(k.x_index(t), col, k.nx, 1) = x;
          if (t < k.T) x = k.sys.A * x;
        }
      }
    Eigen::HouseholderQR<Matrix> qr(Z);
    const Matrix basis = qr.householderQ() * Matrix::Identity(np, m);
    const Matrix red = basis.transpose() * k.G * basis;
    r.reduced_hessian_min = sym_eig_extremes(0.5 * (red + red.transpose())).first;
  }

  auto bound = [&](bool ok, const std::string& what) {
    if (!ok) r.bound_failures.push_back(what);
  };
  bound(r.sigma_max <= r.L_H + tol, "sigma_max(H) exceeds L_H");
  bound(r.sigma_min >= r.gamma_H - tol, "sigma_min(H) below gamma_H");
  bound(r.sigma_max <= r.block_norm_bound * (1 + 1e-12) + tol, "sigma_max(H) exceeds its block-norm bound");
  bound(r.sigma_min_F_sq >= r.gamma_F - tol, "sigma_min(F)^2 below gamma_F");
  if (k.nu > 0) bound(r.reduced_hessian_min >= r.gamma_G - tol, "reduced Hessian below gamma_G");
  return r;
}

DecayProfile kkt_inverse_block_decay(const KktSystem& k, const SpaceTimeGraph& st) {
  if (k.dim() > kKktInverseMaxDim)
    throw SizeGuardError("KKT dimension " + std::to_string(k.dim()) +
                         " exceeds the inverse limit " + std::to_string(kKktInverseMaxDim));
  const auto groups = all_groups(k, st, KktGrouping::same_stage);
  const int n = k.num_nodes();
  std::vector<int> cols;
  std::vector<int> col_start(n + 1, 0);
  for (int j = 0; j < n; ++j) {
    col_start[j] = static_cast<int>(cols.size());
    for (int c : groups[j].idx) cols.push_back(c);
  }
  col_start[n] = static_cast<int>(cols.size());
  Matrix rhs = Matrix::Zero(k.dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) rhs(cols[c], static_cast<Eigen::Index>(c)) = 1.0;
  const Matrix X = solve_linear(k.H, rhs);

  int dmax = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (st.dist(st.id(0, i), st.id(0, j)) != kUnreachable)
        dmax = std::max(dmax, st.dist(st.id(0, i), st.id(0, j)));
  DecayProfile p;
  p.max_norm.assign(dmax + 1, 0.0);
  p.pair_count.assign(dmax + 1, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int d = st.dist(st.id(0, i), st.id(0, j));
      if (d == kUnreachable) continue;
      ++p.pair_count[d];
      const auto& rows = groups[i].idx;
      const int width = col_start[j + 1] - col_start[j];
      if (rows.empty() || width == 0) continue;
      Matrix blk(static_cast<Eigen::Index>(rows.size()), width);
      for (std::size_t r = 0; r < rows.size(); ++r)
        blk.row(static_cast<Eigen::Index>(r)) = X.block(rows[r], col_start[j], 1, width);
      p.max_norm[d] = std::max(p.max_norm[d], spectral_norm(blk));
    }
  try {
    const DecayFit f = fit_decay(p.max_norm);
    p.upsilon_emp = f.upsilon;
    p.rho_emp = f.rho;
  } catch (const InvalidArgument&) {
  }
  return p;
}

}  // namespace netlqr
