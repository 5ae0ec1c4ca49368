#pragma once

// Dense linear-algebra kernel: SVD, Moore-Penrose pseudoinverse,
// minimum-norm least squares, numerical rank and vector angles.
//
// Matrices are Eigen::MatrixXd. The SVD itself is delegated to Eigen
// (JacobiSVD for small problems, BDCSVD for large ones); everything built on
// top of the factors lives here.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pfs/errors.hpp"

namespace pfs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Thin SVD: A = U * diag(singular_values) * V^T with U m x r, V n x r,
/// r = min(m, n). Singular values are non-increasing and non-negative.
struct SvdFactors {
  Matrix u;
  Vector singular_values;
  Matrix v;

  [[nodiscard]] Matrix reconstruct() const {
    return u * singular_values.asDiagonal() * v.transpose();
  }
};

struct LeastSquaresSolution {
  Vector x;
  double residual_norm = 0.0;
  Eigen::Index numerical_rank = 0;
  Vector singular_values;
};

inline void require_valid(const Matrix& a, const char* what) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw contract_error(std::string(what) + ": matrix must be at least 1x1");
  }
  if (!a.allFinite()) {
    throw contract_error(std::string(what) + ": matrix has non-finite entries");
  }
}

// Above this size BDCSVD is markedly faster; below it Eigen would fall back
// to Jacobi internally anyway.
inline constexpr Eigen::Index kBdcThreshold = 128;

/// Thin SVD of a finite matrix. Throws decomposition_error if the routine
/// reports failure or returns non-finite factors.
[[nodiscard]] inline SvdFactors svd(const Matrix& a) {
  require_valid(a, "svd");
  constexpr unsigned kOptions = Eigen::ComputeThinU | Eigen::ComputeThinV;

  SvdFactors out;
  Eigen::ComputationInfo info = Eigen::Success;
  if (std::min(a.rows(), a.cols()) > kBdcThreshold) {
    Eigen::BDCSVD<Matrix> dec(a, kOptions);
    info = dec.info();
    out = {dec.matrixU(), dec.singularValues(), dec.matrixV()};
  } else {
    Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> dec(a, kOptions);
    info = dec.info();
    out = {dec.matrixU(), dec.singularValues(), dec.matrixV()};
  }
  if (info != Eigen::Success || !out.singular_values.allFinite() || !out.u.allFinite() ||
      !out.v.allFinite()) {
    throw decomposition_error("svd: decomposition did not converge");
  }
  return out;
}

/// Singular values only.
[[nodiscard]] inline Vector singular_values(const Matrix& a) {
  require_valid(a, "singular_values");
  Vector sigma;
  Eigen::ComputationInfo info = Eigen::Success;
  if (std::min(a.rows(), a.cols()) > kBdcThreshold) {
    Eigen::BDCSVD<Matrix> dec(a);
    info = dec.info();
    sigma = dec.singularValues();
  } else {
    Eigen::JacobiSVD<Matrix> dec(a);
    info = dec.info();
    sigma = dec.singularValues();
  }
  if (info != Eigen::Success || !sigma.allFinite()) {
    throw decomposition_error("singular_values: decomposition did not converge");
  }
  return sigma;
}

/// max(m, n) * eps * sigma_max.
[[nodiscard]] inline double rank_tolerance(const Vector& sigma, Eigen::Index m, Eigen::Index n) {
  const double sigma_max = sigma.size() > 0 ? sigma.maxCoeff() : 0.0;
  return static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon() * sigma_max;
}

/// Number of singular values strictly above rank_tolerance(sigma, m, n).
/// sigma must be sorted non-increasing.
[[nodiscard]] inline Eigen::Index numerical_rank(const Vector& sigma, Eigen::Index m,
                                                 Eigen::Index n) {
  const double tol = rank_tolerance(sigma, m, n);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma[r] > tol) ++r;
  return r;
}

[[nodiscard]] inline Eigen::Index numerical_rank(const Matrix& a) {
  return numerical_rank(singular_values(a), a.rows(), a.cols());
}

/// Smallest singular value above the rank tolerance, or 0 for a numerically zero matrix.
[[nodiscard]] inline double smallest_nonzero_singular_value(const Vector& sigma, Eigen::Index m,
                                                            Eigen::Index n) {
  const Eigen::Index r = numerical_rank(sigma, m, n);
  return r == 0 ? 0.0 : sigma[r - 1];
}

[[nodiscard]] inline double spectral_norm(const Matrix& a) {
  const Vector sigma = singular_values(a);
  return sigma.size() > 0 ? sigma[0] : 0.0;
}

/// V * diag(1/sigma_i for sigma_i > rank_tol, else 0) * U^T.
[[nodiscard]] inline Matrix pseudoinverse(const SvdFactors& f, double rank_tol) {
  if (!(rank_tol >= 0.0)) throw contract_error("pseudoinverse: rank_tol must be >= 0");
  Vector inv = Vector::Zero(f.singular_values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (f.singular_values[i] > rank_tol) inv[i] = 1.0 / f.singular_values[i];
  }
  return f.v * inv.asDiagonal() * f.u.transpose();
}

[[nodiscard]] inline Matrix pseudoinverse(const Matrix& a, double rank_tol) {
  return pseudoinverse(svd(a), rank_tol);
}

/// Pseudoinverse with the default rank tolerance.
[[nodiscard]] inline Matrix pseudoinverse(const Matrix& a) {
  const SvdFactors f = svd(a);
  return pseudoinverse(f, rank_tolerance(f.singular_values, a.rows(), a.cols()));
}

/// x = A^+ b, the least-squares minimizer of smallest 2-norm.
[[nodiscard]] inline LeastSquaresSolution min_norm_least_squares(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) {
    throw contract_error("min_norm_least_squares: length(b) = " + std::to_string(b.size()) +
                         " but A has " + std::to_string(a.rows()) + " rows");
  }
  if (!b.allFinite()) throw contract_error("min_norm_least_squares: b has non-finite entries");

  const SvdFactors f = svd(a);
  const Eigen::Index rank = numerical_rank(f.singular_values, a.rows(), a.cols());

  // Apply the factors right to left; no explicit A^+ needed.
  Vector coeffs = f.u.leftCols(rank).transpose() * b;
  coeffs.array() /= f.singular_values.head(rank).array();

  LeastSquaresSolution out;
  out.x = f.v.leftCols(rank) * coeffs;
  out.residual_norm = (a * out.x - b).norm();
  out.numerical_rank = rank;
  out.singular_values = f.singular_values;
  return out;
}

/// Unsigned angle between u and v in degrees, in [0, 180].
[[nodiscard]] inline double angle_degrees(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw contract_error("angle_degrees: length mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw contract_error("angle_degrees: zero-norm vector");
  // Same angle as arccos of the clamped cosine, but stays accurate near 0 and
  // 180 degrees where arccos loses about half the digits.
  const Vector uu = u / nu;
  const Vector vv = v / nv;
  return 2.0 * std::atan2((uu - vv).norm(), (uu + vv).norm()) * 180.0 / std::numbers::pi;
}

}  // namespace linalg
}  // namespace pfs
