#pragma once

// Per-feature characteristics fed to clustering: an n x 3 table whose rows are
//   [ |x_i - x~_i| , angle(f_i, b) , angle(A x - x_i f_i, b) ]
// The first column flags redundancy, the other two relevance.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pfs/errors.hpp"
#include "pfs/linalg.hpp"
#include "pfs/perturbation.hpp"

namespace pfs {

/// Angle used for gamma_i when the leave-one-out prediction vanishes.
inline constexpr double kUndefinedAngle = 90.0;

/// Least-squares system ready for dependence analysis: columns of A scaled to
/// unit 2-norm, optionally after mean-centering A and b.
struct PreparedSystem {
  Matrix a;
  Vector b;
  std::vector<Eigen::Index> kept;     // original index of each column of a
  std::vector<Eigen::Index> dropped;  // columns with zero norm after centering
};

/// Centering preserves every exact linear relation between features and turns
/// feature/outcome angles into correlation angles. Zero-norm columns (constant
/// columns when centering) are dropped and reported.
[[nodiscard]] inline PreparedSystem prepare_system(const Matrix& a, const Vector& b, bool center,
                                                   Warnings* warnings = nullptr) {
  linalg::require_valid(a, "prepare_system");
  if (b.size() != a.rows()) throw contract_error("prepare_system: length(b) != rows(A)");

  Matrix work = a;
  Vector target = b;
  if (center) {
    work.rowwise() -= work.colwise().mean();
    target.array() -= target.mean();
  }
  if (!(target.norm() > 0.0)) {
    throw degenerate_error("prepare_system: outcome vector is constant");
  }

  PreparedSystem out;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double floor = std::sqrt(static_cast<double>(a.rows())) * scale *
                       64.0 * std::numeric_limits<double>::epsilon();
  for (Eigen::Index j = 0; j < work.cols(); ++j) {
    if (work.col(j).norm() > floor) {
      out.kept.push_back(j);
    } else {
      out.dropped.push_back(j);
      warn(warnings, "column " + std::to_string(j) + " is constant and was excluded");
    }
  }
  if (out.kept.empty()) throw degenerate_error("prepare_system: every column is constant");

  out.a.resize(a.rows(), static_cast<Eigen::Index>(out.kept.size()));
  for (std::size_t c = 0; c < out.kept.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    out.a.col(col) = work.col(out.kept[c]).normalized();
  }
  out.b = std::move(target);
  return out;
}

/// theta_j = angle(f_j, b) in degrees.
[[nodiscard]] inline Vector angles_to_outcome(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) throw contract_error("angles_to_outcome: length(b) != rows(A)");
  if (!(b.norm() > 0.0)) throw contract_error("angles_to_outcome: b is the zero vector");
  Vector theta(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (!(a.col(j).norm() > 0.0)) {
      throw contract_error("angles_to_outcome: column " + std::to_string(j) + " has zero norm");
    }
    theta[j] = linalg::angle_degrees(a.col(j), b);
  }
  return theta;
}

/// gamma_i = angle(b_hat_i, b) with b_hat_i = A x - x_i f_i, i.e. the
/// prediction after dropping feature i and its coefficient (no re-solve).
[[nodiscard]] inline Vector leave_one_out_angles(const Matrix& a, const Vector& x, const Vector& b) {
  if (x.size() != a.cols() || b.size() != a.rows()) {
    throw contract_error("leave_one_out_angles: dimension mismatch");
  }
  const Vector fitted = a * x;
  const double fitted_norm = fitted.norm();
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  Vector gamma(a.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    const Vector b_hat = fitted - x[i] * a.col(i);
    // Anything at cancellation-noise level counts as the zero vector.
    const double noise = 64.0 * kEps * (fitted_norm + std::abs(x[i]) * a.col(i).norm());
    gamma[i] = b_hat.norm() <= noise ? kUndefinedAngle : linalg::angle_degrees(b_hat, b);
  }
  return gamma;
}

/// Min-max scales each column to [0, 1]; zero-range columns become zeros.
/// Returns the indices of zero-range columns.
inline std::vector<Eigen::Index> scale_columns_to_unit_interval(Matrix& m) {
  std::vector<Eigen::Index> constant;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double lo = m.col(j).minCoeff();
    const double hi = m.col(j).maxCoeff();
    if (hi > lo) {
      m.col(j) = (m.col(j).array() - lo) / (hi - lo);
      // Guard the endpoints against rounding.
      m.col(j) = m.col(j).cwiseMax(0.0).cwiseMin(1.0);
    } else {
      m.col(j).setZero();
      constant.push_back(j);
    }
  }
  return constant;
}

struct CharacteristicsTable {
  Vector delta;
  Vector theta;
  Vector gamma;

  [[nodiscard]] Eigen::Index size() const { return delta.size(); }

  /// Unscaled [delta | theta | gamma], for reporting.
  [[nodiscard]] Matrix raw() const {
    Matrix m(size(), 3);
    m << delta, theta, gamma;
    return m;
  }

  /// Each column min-max scaled to [0, 1]; this is what gets clustered.
  [[nodiscard]] Matrix scaled() const {
    Matrix m = raw();
    scale_columns_to_unit_interval(m);
    return m;
  }
};

struct Characteristics {
  CharacteristicsTable table;
  PerturbationOutcome perturbation;
};

/// Builds the table for an already prepared system (unit-norm columns).
[[nodiscard]] inline Characteristics build_characteristics(const Matrix& a, const Vector& b,
                                                           const PerturbationConfig& config) {
  Characteristics out;
  out.perturbation = perturb_and_solve(a, b, config);
  out.table.delta = out.perturbation.delta;
  out.table.theta = angles_to_outcome(a, b);
  out.table.gamma = leave_one_out_angles(a, out.perturbation.x, b);
  return out;
}

}  // namespace pfs
