#pragma once

// Clustering of the n x 3 characteristics rows and selection of one
// representative feature per cluster.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pfs/errors.hpp"
#include "pfs/linalg.hpp"
#include "pfs/random.hpp"

namespace pfs {

enum class ClusteringMethod { kmeans, cmeans };

struct ClusteringOptions {
  int max_iter = 300;
  double conv_tol = 1e-6;
  double fuzzifier = 2.0;  // c-means only
};

struct ClusterSelection {
  int k = 0;
  std::vector<int> assignment;                   // per feature, in [0, k)
  std::vector<Eigen::Index> centroid_features;   // one distinct feature per cluster
  double inertia = 0.0;                          // SSE (k-means) or objective J_m (c-means)
  std::vector<double> inertia_history;           // one entry per assignment step
  Matrix centroids;                              // k x d
  Matrix memberships;                            // n x k, c-means only
  int iterations = 0;
};

namespace detail {

inline void check_k(const Matrix& points, int k, const char* who) {
  if (points.rows() < 1 || points.cols() < 1) {
    throw contract_error(std::string(who) + ": empty point set");
  }
  if (!points.allFinite()) throw contract_error(std::string(who) + ": non-finite points");
  if (k < 1 || k > points.rows()) {
    throw contract_error(std::string(who) + ": k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(points.rows()) + "]");
  }
}

inline double sq_dist(const Matrix& points, Eigen::Index row, const Matrix& centroids, int c) {
  return (points.row(row) - centroids.row(c)).squaredNorm();
}

inline std::vector<Eigen::Index> cluster_sizes(const std::vector<int>& assignment, int k) {
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
  for (int c : assignment) ++sizes[static_cast<std::size_t>(c)];
  return sizes;
}

/// Nearest centroid per row, ties to the lower cluster id. Returns whether
/// any label changed.
inline bool assign_nearest(const Matrix& points, const Matrix& centroids,
                           std::vector<int>& assignment) {
  bool changed = false;
  const auto k = static_cast<int>(centroids.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = sq_dist(points, i, centroids, 0);
    for (int c = 1; c < k; ++c) {
      const double d = sq_dist(points, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    auto& slot = assignment[static_cast<std::size_t>(i)];
    if (slot != best) {
      slot = best;
      changed = true;
    }
  }
  return changed;
}

/// Moves into every empty cluster the point lying farthest from its own
/// centroid, taken from a cluster that can spare it. Coincident points are
/// only split when no other point is available.
inline bool repair_empty_kmeans(const Matrix& points, Matrix& centroids,
                                std::vector<int>& assignment) {
  const auto k = static_cast<int>(centroids.rows());
  bool repaired = false;
  for (int c = 0; c < k; ++c) {
    auto sizes = cluster_sizes(assignment, k);
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    Eigen::Index pick = -1;
    double pick_d = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const int own = assignment[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(own)] < 2) continue;
      const double d = sq_dist(points, i, centroids, own);
      if (d > pick_d) {
        pick_d = d;
        pick = i;
      }
    }
    assignment[static_cast<std::size_t>(pick)] = c;
    centroids.row(c) = points.row(pick);
    repaired = true;
  }
  return repaired;
}

inline Matrix cluster_means(const Matrix& points, const std::vector<int>& assignment,
                            const Matrix& previous) {
  Matrix sums = Matrix::Zero(previous.rows(), previous.cols());
  std::vector<double> counts(static_cast<std::size_t>(previous.rows()), 0.0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = assignment[static_cast<std::size_t>(i)];
    sums.row(c) += points.row(i);
    counts[static_cast<std::size_t>(c)] += 1.0;
  }
  Matrix out = previous;
  for (Eigen::Index c = 0; c < out.rows(); ++c) {
    const double n = counts[static_cast<std::size_t>(c)];
    if (n > 0.0) out.row(c) = sums.row(c) / n;
  }
  return out;
}

inline double sse(const Matrix& points, const Matrix& centroids,
                  const std::vector<int>& assignment) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += sq_dist(points, i, centroids, assignment[static_cast<std::size_t>(i)]);
  }
  return total;
}

/// Per cluster, the member nearest its centroid (ties to the lower index).
inline std::vector<Eigen::Index> nearest_members(const Matrix& points, const Matrix& centroids,
                                                 const std::vector<int>& assignment) {
  const auto k = static_cast<std::size_t>(centroids.rows());
  std::vector<Eigen::Index> pick(k, -1);
  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = assignment[static_cast<std::size_t>(i)];
    const double d = sq_dist(points, i, centroids, c);
    if (d < best[static_cast<std::size_t>(c)]) {
      best[static_cast<std::size_t>(c)] = d;
      pick[static_cast<std::size_t>(c)] = i;
    }
  }
  return pick;
}

}  // namespace detail

/// k-means++ seeding: first centre uniform, the rest sampled proportionally
/// to squared distance from the nearest chosen centre. When every remaining
/// point coincides with a centre, the lowest unused index is taken.
[[nodiscard]] inline std::vector<Eigen::Index> kmeans_plus_plus(const Matrix& points, int k,
                                                                std::uint64_t seed) {
  detail::check_k(points, k, "kmeans_plus_plus");
  Rng rng(seed);
  const Eigen::Index n = points.rows();
  std::vector<Eigen::Index> chosen;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  auto take = [&](Eigen::Index idx) {
    chosen.push_back(idx);
    used[static_cast<std::size_t>(idx)] = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& slot = d2[static_cast<std::size_t>(i)];
      slot = std::min(slot, (points.row(i) - points.row(idx)).squaredNorm());
    }
  };

  take(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n))));
  while (static_cast<int>(chosen.size()) < k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!used[static_cast<std::size_t>(i)]) total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index next = -1;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = used[static_cast<std::size_t>(i)] ? 0.0 : d2[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        acc += w;
        next = i;
        if (acc > target) break;
      }
    } else {
      for (Eigen::Index i = 0; i < n && next < 0; ++i) {
        if (!used[static_cast<std::size_t>(i)]) next = i;
      }
    }
    take(next);
  }
  return chosen;
}

/// Lloyd iterations from explicit initial centre rows.
[[nodiscard]] inline ClusterSelection kmeans_from(const Matrix& points,
                                                  const std::vector<Eigen::Index>& initial,
                                                  const ClusteringOptions& opts = {}) {
  const auto k = static_cast<int>(initial.size());
  detail::check_k(points, k, "kmeans");
  Matrix centroids(k, points.cols());
  for (int c = 0; c < k; ++c) {
    const Eigen::Index idx = initial[static_cast<std::size_t>(c)];
    if (idx < 0 || idx >= points.rows()) throw contract_error("kmeans: initial index out of range");
    centroids.row(c) = points.row(idx);
  }

  ClusterSelection out;
  out.k = k;
  out.assignment.assign(static_cast<std::size_t>(points.rows()), -1);
  detail::assign_nearest(points, centroids, out.assignment);
  detail::repair_empty_kmeans(points, centroids, out.assignment);
  out.inertia_history.push_back(detail::sse(points, centroids, out.assignment));

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Matrix updated = detail::cluster_means(points, out.assignment, centroids);
    const double movement = (updated - centroids).rowwise().norm().maxCoeff();
    centroids = updated;
    bool changed = detail::assign_nearest(points, centroids, out.assignment);
    changed = detail::repair_empty_kmeans(points, centroids, out.assignment) || changed;
    out.inertia_history.push_back(detail::sse(points, centroids, out.assignment));
    out.iterations = iter + 1;
    if (!changed || movement < opts.conv_tol) break;
  }

  out.centroids = detail::cluster_means(points, out.assignment, centroids);
  out.inertia = detail::sse(points, out.centroids, out.assignment);
  out.inertia_history.push_back(out.inertia);
  out.centroid_features = detail::nearest_members(points, out.centroids, out.assignment);
  return out;
}

/// k-means with k-means++ seeding.
[[nodiscard]] inline ClusterSelection kmeans(const Matrix& points, int k, std::uint64_t seed,
                                             const ClusteringOptions& opts = {}) {
  return kmeans_from(points, kmeans_plus_plus(points, k, seed), opts);
}

namespace detail {

inline void fuzzy_memberships(const Matrix& points, const Matrix& centroids, double fuzzifier,
                              Matrix& u) {
  const Eigen::Index k = centroids.rows();
  const double power = 1.0 / (fuzzifier - 1.0);
  Vector d2(k);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int zeros = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      d2[c] = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d2[c] == 0.0) ++zeros;
    }
    if (zeros > 0) {
      for (Eigen::Index c = 0; c < k; ++c) u(i, c) = d2[c] == 0.0 ? 1.0 / zeros : 0.0;
      continue;
    }
    // u_ic = 1 / sum_l (d_ic / d_il)^(2/(m-1)), evaluated on squared distances.
    for (Eigen::Index c = 0; c < k; ++c) {
      double denom = 0.0;
      for (Eigen::Index l = 0; l < k; ++l) denom += std::pow(d2[c] / d2[l], power);
      u(i, c) = 1.0 / denom;
    }
    u.row(i) /= u.row(i).sum();
  }
}

inline double fuzzy_objective(const Matrix& points, const Matrix& centroids, const Matrix& u,
                              double fuzzifier) {
  double j = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index c = 0; c < centroids.rows(); ++c)
      j += std::pow(u(i, c), fuzzifier) * (points.row(i) - centroids.row(c)).squaredNorm();
  return j;
}

}  // namespace detail

/// Fuzzy c-means from explicit initial centre rows.
[[nodiscard]] inline ClusterSelection fuzzy_cmeans_from(const Matrix& points,
                                                        const std::vector<Eigen::Index>& initial,
                                                        const ClusteringOptions& opts = {}) {
  const auto k = static_cast<int>(initial.size());
  detail::check_k(points, k, "fuzzy_cmeans");
  if (!(opts.fuzzifier > 1.0)) throw contract_error("fuzzy_cmeans: fuzzifier must be > 1");

  Matrix centroids(k, points.cols());
  for (int c = 0; c < k; ++c) {
    const Eigen::Index idx = initial[static_cast<std::size_t>(c)];
    if (idx < 0 || idx >= points.rows()) {
      throw contract_error("fuzzy_cmeans: initial index out of range");
    }
    centroids.row(c) = points.row(idx);
  }

  ClusterSelection out;
  out.k = k;
  Matrix u(points.rows(), k);
  detail::fuzzy_memberships(points, centroids, opts.fuzzifier, u);
  out.inertia_history.push_back(detail::fuzzy_objective(points, centroids, u, opts.fuzzifier));

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Matrix w = u.array().pow(opts.fuzzifier).matrix();
    Matrix updated = w.transpose() * points;
    for (int c = 0; c < k; ++c) {
      const double mass = w.col(c).sum();
      if (mass > 0.0) {
        updated.row(c) /= mass;
      } else {
        updated.row(c) = centroids.row(c);
      }
    }
    const double movement = (updated - centroids).rowwise().norm().maxCoeff();
    centroids = updated;
    detail::fuzzy_memberships(points, centroids, opts.fuzzifier, u);
    out.inertia_history.push_back(detail::fuzzy_objective(points, centroids, u, opts.fuzzifier));
    out.iterations = iter + 1;
    if (movement < opts.conv_tol) break;
  }

  // Hard labels by maximal membership, ties to the lower cluster id.
  out.assignment.assign(static_cast<std::size_t>(points.rows()), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::Index best = 0;
    u.row(i).maxCoeff(&best);
    out.assignment[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  // Empty hard clusters take the most-committed feature that can be spared.
  for (int c = 0; c < k; ++c) {
    const auto sizes = detail::cluster_sizes(out.assignment, k);
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    Eigen::Index pick = -1;
    double pick_u = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const int own = out.assignment[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(own)] < 2) continue;
      if (u(i, c) > pick_u) {
        pick_u = u(i, c);
        pick = i;
      }
    }
    out.assignment[static_cast<std::size_t>(pick)] = c;
  }

  out.centroid_features.assign(static_cast<std::size_t>(k), -1);
  std::vector<double> best(static_cast<std::size_t>(k), -1.0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = out.assignment[static_cast<std::size_t>(i)];
    if (u(i, c) > best[static_cast<std::size_t>(c)]) {
      best[static_cast<std::size_t>(c)] = u(i, c);
      out.centroid_features[static_cast<std::size_t>(c)] = i;
    }
  }
  out.centroids = std::move(centroids);
  out.memberships = std::move(u);
  out.inertia = out.inertia_history.back();
  return out;
}

[[nodiscard]] inline ClusterSelection fuzzy_cmeans(const Matrix& points, int k, std::uint64_t seed,
                                                   const ClusteringOptions& opts = {}) {
  return fuzzy_cmeans_from(points, kmeans_plus_plus(points, k, seed), opts);
}

[[nodiscard]] inline ClusterSelection cluster(ClusteringMethod method, const Matrix& points, int k,
                                              std::uint64_t seed,
                                              const ClusteringOptions& opts = {}) {
  return method == ClusteringMethod::kmeans ? kmeans(points, k, seed, opts)
                                            : fuzzy_cmeans(points, k, seed, opts);
}

}  // namespace pfs
