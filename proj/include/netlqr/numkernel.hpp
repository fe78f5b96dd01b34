#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace netlqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTol = 1e-10;

void require_finite(const Matrix& m, const char* what);
bool is_symmetric(const Matrix& m, double tol = kSymmetryTol);

double spectral_norm(const Matrix& m);
double spectral_radius(const Matrix& m);

// (min, max) eigenvalue of a symmetric matrix.
std::pair<double, double> sym_eig_extremes(const Matrix& s);

// (sigma_min, sigma_max) over the min(rows, cols) singular values.
std::pair<double, double> singular_value_extremes(const Matrix& m);

Matrix psd_sqrt(const Matrix& s);

Matrix solve_linear(const Matrix& a, const Matrix& b);

// sqrt(max block-row sum) * sqrt(max block-col sum) of block spectral norms,
// with blocks given by row/column size lists. An upper bound on spectral_norm.
double block_norm_bound(const Matrix& m, const std::vector<int>& row_sizes,
                        const std::vector<int>& col_sizes);

}  // namespace netlqr
