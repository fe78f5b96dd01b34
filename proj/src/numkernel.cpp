#include "netlqr/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "netlqr/errors.hpp"

namespace netlqr {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite entries");
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double spectral_norm(const Matrix& m) {
  require_finite(m, "spectral_norm");
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("spectral_radius: matrix is not square");
  require_finite(m, "spectral_radius");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<double, double> sym_eig_extremes(const Matrix& s) {
  if (s.rows() != s.cols()) throw InvalidArgument("sym_eig_extremes: matrix is not square");
  require_finite(s, "sym_eig_extremes");
  if (!is_symmetric(s)) throw NumericalError("sym_eig_extremes: matrix is not symmetric");
  if (s.size() == 0) return {0.0, 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

std::pair<double, double> singular_value_extremes(const Matrix& m) {
  require_finite(m, "singular_value_extremes");
  if (m.size() == 0) return {0.0, 0.0};
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  return {sv(sv.size() - 1), sv(0)};
}

Matrix psd_sqrt(const Matrix& s) {
  if (s.rows() != s.cols()) throw InvalidArgument("psd_sqrt: matrix is not square");
  require_finite(s, "psd_sqrt");
  if (!is_symmetric(s)) throw NumericalError("psd_sqrt: matrix is not symmetric");
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Vector ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10) {
    std::ostringstream msg;
    msg << "psd_sqrt: matrix is indefinite (min eigenvalue " << ev.minCoeff() << ")";
    throw NumericalError(msg.str());
  }
  Vector root = ev.cwiseMax(0.0).cwiseSqrt();
  Matrix r = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols()) throw InvalidArgument("solve_linear: matrix is not square");
  if (a.rows() != b.rows()) throw InvalidArgument("solve_linear: dimension mismatch");
  require_finite(a, "solve_linear");
  require_finite(b, "solve_linear");
  if (a.size() == 0) return Matrix(0, b.cols());
  Eigen::PartialPivLU<Matrix> lu(a);
  const double rc = lu.rcond();
  if (!(rc > 1e-15)) {
    std::ostringstream msg;
    msg << "solve_linear: matrix is singular or ill-conditioned (rcond estimate " << rc << ")";
    throw NumericalError(msg.str());
  }
  Matrix x = lu.solve(b);
  const double na = a.lpNorm<Eigen::Infinity>();
  const double res = (a * x - b).lpNorm<Eigen::Infinity>();
  const double scale = na * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  if (!x.allFinite() || res > 1e-8 * scale) {
    std::ostringstream msg;
    msg << "solve_linear: residual " << res << " too large (rcond estimate " << rc << ")";
    throw NumericalError(msg.str());
  }
  return x;
}

double block_norm_bound(const Matrix& m, const std::vector<int>& row_sizes,
                        const std::vector<int>& col_sizes) {
  const int rsum = std::accumulate(row_sizes.begin(), row_sizes.end(), 0);
  const int csum = std::accumulate(col_sizes.begin(), col_sizes.end(), 0);
  if (rsum != m.rows() || csum != m.cols())
    throw InvalidArgument("block_norm_bound: block sizes do not match matrix");
  std::vector<double> row_total(row_sizes.size(), 0.0), col_total(col_sizes.size(), 0.0);
  int r0 = 0;
  for (std::size_t i = 0; i < row_sizes.size(); ++i) {
    int c0 = 0;
    for (std::size_t j = 0; j < col_sizes.size(); ++j) {
      if (row_sizes[i] > 0 && col_sizes[j] > 0) {
        auto blk = m.block(r0, c0, row_sizes[i], col_sizes[j]);
        if (!blk.isZero(0.0)) {
          double nb = spectral_norm(blk);
          row_total[i] += nb;
          col_total[j] += nb;
        }
      }
      c0 += col_sizes[j];
    }
    r0 += row_sizes[i];
  }
  double rmax = row_total.empty() ? 0.0 : *std::max_element(row_total.begin(), row_total.end());
  double cmax = col_total.empty() ? 0.0 : *std::max_element(col_total.begin(), col_total.end());
  return std::sqrt(rmax) * std::sqrt(cmax);
}

}  // namespace netlqr
