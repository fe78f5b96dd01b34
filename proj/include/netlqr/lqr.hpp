#pragma once

#include <vector>

#include "netlqr/numkernel.hpp"

namespace netlqr {

struct NetworkedSystem;
struct DenseSystem;

struct DareOptions {
  double tol = 1e-12;
  long max_iter = 200000;
};

struct DareSolution {
  Matrix P;
  long iterations = 0;
  double residual = 0.0;  // spectral norm of the Riccati residual
};

// Value iteration P <- A'PA - A'PB (R + B'PB)^{-1} B'PA + Q from P = Q.
// Throws NonConvergence if the cap is hit, the iterates blow up, or the
// resulting closed loop is not stable.
DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const DareOptions& opts = {});

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P);

// Dense gain with node block structure. Block (i,j) is input_dims[i] x state_dims[j].
class GainMatrix {
 public:
  GainMatrix() = default;
  GainMatrix(Matrix dense, std::vector<int> input_dims, std::vector<int> state_dims);

  const Matrix& dense() const { return dense_; }
  int num_nodes() const { return static_cast<int>(input_dims_.size()); }
  const std::vector<int>& input_dims() const { return input_dims_; }
  const std::vector<int>& state_dims() const { return state_dims_; }
  int row_offset(int i) const { return row_off_[i]; }
  int col_offset(int j) const { return col_off_[j]; }

  Matrix block(int i, int j) const;
  bool present(int i, int j) const { return present_[static_cast<std::size_t>(i) * num_nodes() + j]; }
  // Replaces block (i,j) by an exact zero and marks it absent.
  void remove_block(int i, int j);
  std::size_t num_present() const;

 private:
  Matrix dense_;
  std::vector<int> input_dims_, state_dims_;
  std::vector<int> row_off_, col_off_;
  std::vector<char> present_;
};

// K = (R + B'PB)^{-1} B'PA.
Matrix optimal_gain(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P);
GainMatrix optimal_gain(const NetworkedSystem& sys, const DenseSystem& d, const Matrix& P);
GainMatrix gain_from_dense(const NetworkedSystem& sys, Matrix K);

// A - B*K.
Matrix closed_loop(const Matrix& A, const Matrix& B, const Matrix& K);

inline constexpr double kStabilityMargin = 1e-12;

// Solves Phi' P Phi - P + M = 0 by Smith doubling. Throws UnstableError when
// sr(Phi) >= 1 - kStabilityMargin.
Matrix solve_discrete_lyapunov(const Matrix& Phi, const Matrix& M);

double lyapunov_residual(const Matrix& Phi, const Matrix& M, const Matrix& P);

// Lyapunov cost of policy u = -Kx.
Matrix cost_matrix(const DenseSystem& d, const Matrix& K);

// P_K - P* for a stabilizing K, from Phi_K' X Phi_K - X + dK'(R + B'P*B)dK = 0
// with dK = K - K*. Accurate when P_K and P* agree to many digits.
Matrix cost_gap_matrix(const DenseSystem& d, const Matrix& Pstar, const Matrix& Kstar,
                       const Matrix& K);

std::vector<Vector> simulate(const Matrix& Phi, const Vector& x0, int T);

// sum_t 1/2 x'Qx + 1/2 u'Ru with u = -Kx over the trajectory.
double accumulate_cost(const std::vector<Vector>& traj, const Matrix& Q, const Matrix& R,
                       const Matrix& K);

}  // namespace netlqr
