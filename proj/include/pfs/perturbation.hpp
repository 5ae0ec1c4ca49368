#pragma once

// Perturbing the least-squares system AX = b to expose linear dependences
// between columns of A.
//
// For a small random E, solve AX = b and (A + E)X~ = b with minimum-norm
// least squares. A column independent of the others gets |x_i - x~_i| ~ 0,
// while the differences over a minimal dependent set {f_1..f_t} with
// sum c_i f_i = 0 line up with (c_1, ..., c_t).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pfs/errors.hpp"
#include "pfs/linalg.hpp"
#include "pfs/random.hpp"

namespace pfs {

enum class PerturbationMode {
  /// Entries uniform on [min(A)/c_l, max(A)/c_u].
  algorithm1,
  /// Entries uniform on [-1, 1], rescaled so ||E||_2 = 10^-s * sigma_min(A).
  sigma_scaled,
};

struct PerturbationConfig {
  PerturbationMode mode = PerturbationMode::algorithm1;
  double c_l = 1e6;
  double c_u = 1e5;
  int s = 3;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(c_u > 0.0) || !(c_l > c_u)) {
      throw contract_error("PerturbationConfig: require c_l > c_u > 0");
    }
    if (s < 0) throw contract_error("PerturbationConfig: s must be >= 0");
  }
};

struct PerturbationOutcome {
  Vector delta;       // |x - x_tilde|
  Vector difference;  // x - x_tilde, signed
  Vector x;
  Vector x_tilde;
  Matrix perturbation;  // E
  double e_norm = 0.0;  // ||E||_2
  Eigen::Index rank = 0;
  double sigma_min = 0.0;  // smallest non-zero singular value of A
};

/// Draws E for an (rows x cols) system. a_min/a_max are min(A)/max(A);
/// sigma_min is only read in sigma_scaled mode and must then be positive.
[[nodiscard]] inline Matrix generate_perturbation(Eigen::Index rows, Eigen::Index cols,
                                                  const PerturbationConfig& config, double a_min,
                                                  double a_max, double sigma_min) {
  config.validate();
  if (rows < 1 || cols < 1) throw contract_error("generate_perturbation: empty shape");
  Rng rng(config.seed);
  Matrix e(rows, cols);

  if (config.mode == PerturbationMode::algorithm1) {
    double lo = a_min / config.c_l;
    double hi = a_max / config.c_u;
    if (lo > hi) std::swap(lo, hi);
    // Column-major fill; the draw order is part of the determinism contract.
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) e(i, j) = rng.uniform(lo, hi);
    return e;
  }

  if (!(sigma_min > 0.0)) {
    throw degenerate_error(
        "generate_perturbation: sigma_min(A) = 0, sigma_scaled mode is undefined; use algorithm1");
  }
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) e(i, j) = rng.uniform(-1.0, 1.0);
  const double norm = linalg::spectral_norm(e);
  if (!(norm > 0.0)) throw degenerate_error("generate_perturbation: drew a zero matrix");
  e *= std::pow(10.0, -config.s) * sigma_min / norm;
  return e;
}

/// Solves the original and perturbed systems. b is scaled to unit length
/// first so that delta magnitudes are comparable to 10^-s; columns of A are
/// expected to be unit-norm already (see prepare_system).
[[nodiscard]] inline PerturbationOutcome perturb_and_solve(const Matrix& a, const Vector& b,
                                                           const PerturbationConfig& config) {
  config.validate();
  if (b.size() != a.rows()) throw contract_error("perturb_and_solve: length(b) != rows(A)");
  const double b_norm = b.norm();
  if (!(b_norm > 0.0)) throw contract_error("perturb_and_solve: b is the zero vector");
  const Vector b_unit = b / b_norm;

  const linalg::LeastSquaresSolution base = linalg::min_norm_least_squares(a, b_unit);

  PerturbationOutcome out;
  out.rank = base.numerical_rank;
  out.sigma_min = linalg::smallest_nonzero_singular_value(base.singular_values, a.rows(), a.cols());
  out.perturbation =
      generate_perturbation(a.rows(), a.cols(), config, a.minCoeff(), a.maxCoeff(), out.sigma_min);
  out.e_norm = linalg::spectral_norm(out.perturbation);

  const linalg::LeastSquaresSolution perturbed =
      linalg::min_norm_least_squares(a + out.perturbation, b_unit);

  out.x = base.x;
  out.x_tilde = perturbed.x;
  out.difference = out.x - out.x_tilde;
  out.delta = out.difference.cwiseAbs();
  if (!out.delta.allFinite()) {
    throw decomposition_error("perturb_and_solve: non-finite solution difference");
  }
  return out;
}

/// max_i |sigma_i - sigma'_i|, shorter spectrum padded with zeros.
[[nodiscard]] inline double weyl_gap(const Vector& sigma_a, const Vector& sigma_perturbed) {
  const Eigen::Index len = std::max(sigma_a.size(), sigma_perturbed.size());
  double gap = 0.0;
  for (Eigen::Index i = 0; i < len; ++i) {
    const double p = i < sigma_a.size() ? sigma_a[i] : 0.0;
    const double q = i < sigma_perturbed.size() ? sigma_perturbed[i] : 0.0;
    gap = std::max(gap, std::abs(p - q));
  }
  return gap;
}

struct DependenceGroups {
  std::vector<Eigen::Index> independent;            // delta_i <= tol_zero
  std::vector<std::vector<Eigen::Index>> groups;    // size >= 2, members ascending
  std::vector<Eigen::Index> unmatched;              // non-zero delta, no partner
};

/// Labels delta_i <= tol_zero independent and groups the rest by the
/// transitive closure of |delta_i - delta_j| <= tol_group * max(delta_i, delta_j).
[[nodiscard]] inline DependenceGroups detect_dependence_groups(const Vector& delta,
                                                               double tol_zero = 1e-3,
                                                               double tol_group = 1e-2) {
  if (tol_zero < 0.0 || tol_group < 0.0) {
    throw contract_error("detect_dependence_groups: tolerances must be >= 0");
  }
  DependenceGroups out;
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    (delta[i] <= tol_zero ? out.independent : active).push_back(i);
  }
  std::stable_sort(active.begin(), active.end(),
                   [&](Eigen::Index p, Eigen::Index q) { return delta[p] < delta[q]; });

  std::vector<std::size_t> parent(active.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };

  // In sorted order d_i <= d_j, the relation reduces to d_j * (1 - tol) <= d_i,
  // which is monotone in j, so a forward scan per i finds every partner.
  for (std::size_t i = 0; i < active.size(); ++i) {
    const double di = delta[active[i]];
    for (std::size_t j = i + 1; j < active.size(); ++j) {
      const double dj = delta[active[j]];
      if (dj - di > tol_group * dj) break;
      parent[find(j)] = find(i);
    }
  }

  std::vector<std::vector<Eigen::Index>> sets(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) sets[find(i)].push_back(active[i]);
  for (auto& set : sets) {
    if (set.empty()) continue;
    std::sort(set.begin(), set.end());
    if (set.size() == 1) {
      out.unmatched.push_back(set.front());
    } else {
      out.groups.push_back(std::move(set));
    }
  }
  std::sort(out.groups.begin(), out.groups.end());
  std::sort(out.unmatched.begin(), out.unmatched.end());
  return out;
}

/// Signed differences over `members`, scaled so the largest magnitude is 1.
[[nodiscard]] inline std::vector<double> proportionality_vector(
    const Vector& difference, const std::vector<Eigen::Index>& members) {
  double scale = 0.0;
  for (auto i : members) scale = std::max(scale, std::abs(difference[i]));
  std::vector<double> out;
  out.reserve(members.size());
  for (auto i : members) out.push_back(scale > 0.0 ? difference[i] / scale : 0.0);
  return out;
}

}  // namespace pfs
