#include "netlqr/lqr.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "netlqr/errors.hpp"
#include "netlqr/model.hpp"

namespace netlqr {

namespace {

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_dare_dims(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
      R.cols() != B.cols())
    throw InvalidArgument("solve_dare: inconsistent dimensions");
  require_finite(A, "solve_dare A");
  require_finite(B, "solve_dare B");
  require_finite(Q, "solve_dare Q");
  require_finite(R, "solve_dare R");
}

// A'PA - A'PB (R + B'PB)^{-1} B'PA + Q, unsymmetrized.
Matrix riccati_map(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                   const Matrix& P) {
  Matrix PA = P * A;
  Matrix out = A.transpose() * PA + Q;
  if (B.cols() > 0) {
    Matrix BtPA = B.transpose() * PA;
    Matrix S = R + B.transpose() * P * B;
    Eigen::LLT<Matrix> llt(sym(S));
    if (llt.info() != Eigen::Success) throw NumericalError("solve_dare: R + B'PB is not positive definite");
    out -= BtPA.transpose() * llt.solve(BtPA);
  }
  return out;
}

}  // namespace

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P) {
  return spectral_norm(riccati_map(A, B, Q, R, P) - P);
}

DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const DareOptions& opts) {
  check_dare_dims(A, B, Q, R);
  if (!is_symmetric(Q, kSymmetryTol * std::max(1.0, Q.cwiseAbs().maxCoeff())))
    throw NumericalError("solve_dare: Q is not symmetric");
  if (B.cols() > 0) {
    if (!is_symmetric(R, kSymmetryTol * std::max(1.0, R.cwiseAbs().maxCoeff())))
      throw NumericalError("solve_dare: R is not symmetric");
    Eigen::LLT<Matrix> llt(sym(R));
    if (llt.info() != Eigen::Success) throw NumericalError("solve_dare: R is not positive definite");
  }
  const auto n = A.rows();
  Matrix P = sym(Q);
  long it = 0;
  bool converged = false;
  while (it < opts.max_iter) {
    ++it;
    Matrix Pn;
    try {
      Pn = sym(riccati_map(A, B, Q, R, P));
    } catch (const NumericalError&) {
      throw NonConvergence("solve_dare: iterates lost definiteness after " + std::to_string(it) +
                           " iterations (norm " + std::to_string(P.norm()) + "; likely not stabilizable)");
    }
    if (!Pn.allFinite())
      throw NonConvergence("solve_dare: iterates diverged after " + std::to_string(it) + " iterations");
    const double scale = std::max(1.0, Pn.norm());
    Eigen::LLT<Matrix> psd(Pn + 1e-10 * scale * Matrix::Identity(n, n));
    if (psd.info() != Eigen::Success)
      throw NumericalError("solve_dare: iterate " + std::to_string(it) + " is not positive semidefinite");
    const double denom = Pn.norm();
    const double change = denom > 0.0 ? (Pn - P).norm() / denom : (Pn - P).norm();
    P = std::move(Pn);
    if (change <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonConvergence("solve_dare: no convergence within " + std::to_string(opts.max_iter) +
                         " iterations (likely not stabilizable or not detectable)");
  const Matrix K = optimal_gain(A, B, R, P);
  const double sr = spectral_radius(closed_loop(A, B, K));
  if (!(sr < 1.0 - kStabilityMargin)) {
    std::ostringstream msg;
    msg << "solve_dare: fixed point does not stabilize the system (closed-loop spectral radius "
        << sr << "; likely not detectable)";
    throw NonConvergence(msg.str());
  }
  return DareSolution{P, it, dare_residual(A, B, Q, R, P)};
}

GainMatrix::GainMatrix(Matrix dense, std::vector<int> input_dims, std::vector<int> state_dims)
    : dense_(std::move(dense)), input_dims_(std::move(input_dims)), state_dims_(std::move(state_dims)) {
  if (input_dims_.size() != state_dims_.size())
    throw InvalidArgument("GainMatrix: node count mismatch");
  int r = 0, c = 0;
  for (int d : input_dims_) {
    row_off_.push_back(r);
    r += d;
  }
  for (int d : state_dims_) {
    col_off_.push_back(c);
    c += d;
  }
  if (dense_.rows() != r || dense_.cols() != c)
    throw InvalidArgument("GainMatrix: dense size does not match node dimensions");
  present_.assign(input_dims_.size() * input_dims_.size(), 1);
}

Matrix GainMatrix::block(int i, int j) const {
  return dense_.block(row_off_[i], col_off_[j], input_dims_[i], state_dims_[j]);
}

void GainMatrix::remove_block(int i, int j) {
  dense_.block(row_off_[i], col_off_[j], input_dims_[i], state_dims_[j]).setZero();
  present_[static_cast<std::size_t>(i) * num_nodes() + j] = 0;
}

std::size_t GainMatrix::num_present() const {
  std::size_t n = 0;
  for (char p : present_) n += p ? 1 : 0;
  return n;
}

Matrix optimal_gain(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P) {
  if (B.cols() == 0) return Matrix::Zero(0, A.cols());
  Matrix S = R + B.transpose() * P * B;
  return solve_linear(sym(S), B.transpose() * P * A);
}

GainMatrix gain_from_dense(const NetworkedSystem& sys, Matrix K) {
  return GainMatrix(std::move(K), sys.input_dims, sys.state_dims);
}

GainMatrix optimal_gain(const NetworkedSystem& sys, const DenseSystem& d, const Matrix& P) {
  return gain_from_dense(sys, optimal_gain(d.A, d.B, d.R, P));
}

Matrix closed_loop(const Matrix& A, const Matrix& B, const Matrix& K) {
  if (B.rows() != A.rows() || K.rows() != B.cols() || K.cols() != A.cols())
    throw InvalidArgument("closed_loop: inconsistent dimensions");
  if (B.cols() == 0) return A;
  return A - B * K;
}

Matrix solve_discrete_lyapunov(const Matrix& Phi, const Matrix& M) {
  if (Phi.rows() != Phi.cols() || M.rows() != Phi.rows() || M.cols() != Phi.cols())
    throw InvalidArgument("solve_discrete_lyapunov: inconsistent dimensions");
  require_finite(M, "solve_discrete_lyapunov");
  if (!is_symmetric(M, kSymmetryTol * std::max(1.0, M.cwiseAbs().maxCoeff())))
    throw NumericalError("solve_discrete_lyapunov: M is not symmetric");
  const double sr = spectral_radius(Phi);
  if (!(sr < 1.0 - kStabilityMargin)) {
    std::ostringstream msg;
    msg << "solve_discrete_lyapunov: closed loop is " << (sr < 1.0 ? "marginal" : "unstable")
        << " (spectral radius " << sr << ")";
    throw UnstableError(msg.str());
  }
  Matrix P = sym(M);
  Matrix Psi = Phi;
  for (int k = 0; k < 200; ++k) {
    if (Psi.norm() <= 1e-15) return P;
    P = sym(P + Psi.transpose() * P * Psi);
    Psi = (Psi * Psi).eval();
    if (!P.allFinite()) break;
  }
  if (Psi.norm() <= 1e-15 && P.allFinite()) return P;
  throw NonConvergence("solve_discrete_lyapunov: doubling did not converge");
}

double lyapunov_residual(const Matrix& Phi, const Matrix& M, const Matrix& P) {
  return spectral_norm(Phi.transpose() * P * Phi - P + M);
}

Matrix cost_matrix(const DenseSystem& d, const Matrix& K) {
  Matrix M = sym(d.Q + K.transpose() * d.R * K);
  return solve_discrete_lyapunov(closed_loop(d.A, d.B, K), M);
}

Matrix cost_gap_matrix(const DenseSystem& d, const Matrix& Pstar, const Matrix& Kstar,
                       const Matrix& K) {
  Matrix dK = K - Kstar;
  Matrix S = sym(d.R + d.B.transpose() * Pstar * d.B);
  Matrix M = sym(dK.transpose() * S * dK);
  return solve_discrete_lyapunov(closed_loop(d.A, d.B, K), M);
}

std::vector<Vector> simulate(const Matrix& Phi, const Vector& x0, int T) {
  if (T < 0) throw InvalidArgument("simulate: negative horizon");
  if (Phi.rows() != Phi.cols() || Phi.cols() != x0.size())
    throw InvalidArgument("simulate: inconsistent dimensions");
  std::vector<Vector> traj;
  traj.reserve(static_cast<std::size_t>(T) + 1);
  traj.push_back(x0);
  for (int t = 0; t < T; ++t) traj.push_back(Phi * traj.back());
  return traj;
}

double accumulate_cost(const std::vector<Vector>& traj, const Matrix& Q, const Matrix& R,
                       const Matrix& K) {
  double c = 0.0;
  for (const auto& x : traj) {
    Vector u = -K * x;
    c += 0.5 * x.dot(Q * x) + 0.5 * u.dot(R * u);
  }
  return c;
}

}  // namespace netlqr
