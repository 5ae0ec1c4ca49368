#pragma once

// Classifiers used to score candidate feature subsets, the stratified 70/30
// split, and balanced accuracy (mean per-class recall).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pfs/errors.hpp"
#include "pfs/linalg.hpp"
#include "pfs/random.hpp"

namespace pfs {

struct LabeledData {
  Matrix features;          // m x p
  std::vector<int> labels;  // class ids in [0, class_count)
  int class_count = 0;

  [[nodiscard]] Eigen::Index rows() const { return features.rows(); }

  void validate() const {
    if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
      throw contract_error("LabeledData: label count does not match row count");
    }
    for (int y : labels) {
      if (y < 0 || y >= class_count) {
        throw contract_error("LabeledData: label " + std::to_string(y) + " outside [0, " +
                             std::to_string(class_count) + ")");
      }
    }
  }
};

[[nodiscard]] inline Matrix select_columns(const Matrix& m, const std::vector<Eigen::Index>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = m.col(cols[c]);
  return out;
}

[[nodiscard]] inline Matrix select_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

[[nodiscard]] inline LabeledData subset_rows(const LabeledData& d,
                                             const std::vector<Eigen::Index>& rows) {
  LabeledData out;
  out.features = select_rows(d.features, rows);
  out.class_count = d.class_count;
  out.labels.reserve(rows.size());
  for (auto r : rows) out.labels.push_back(d.labels[static_cast<std::size_t>(r)]);
  return out;
}

[[nodiscard]] inline LabeledData subset_columns(const LabeledData& d,
                                                const std::vector<Eigen::Index>& cols) {
  return {select_columns(d.features, cols), d.labels, d.class_count};
}

struct TrainTestSplit {
  LabeledData train;
  LabeledData test;
  std::vector<Eigen::Index> train_rows;  // ascending, indices into the input
  std::vector<Eigen::Index> test_rows;
  std::uint64_t seed = 0;
};

inline constexpr double kTrainFraction = 0.7;

/// Stratified split: round(0.7 m) training rows apportioned over classes by
/// largest remainder, then every class given at least one training row.
[[nodiscard]] inline TrainTestSplit split_70_30(const LabeledData& data, std::uint64_t seed,
                                                Warnings* warnings = nullptr) {
  data.validate();
  const Eigen::Index m = data.rows();
  if (m < 4) throw contract_error("split_70_30: need at least 4 rows");

  std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(data.class_count));
  for (Eigen::Index i = 0; i < m; ++i) {
    by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])].push_back(i);
  }

  const auto target = static_cast<Eigen::Index>(std::llround(kTrainFraction * static_cast<double>(m)));
  std::vector<Eigen::Index> quota(by_class.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  Eigen::Index assigned = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const double exact = kTrainFraction * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<Eigen::Index>(std::floor(exact));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& p, const auto& q) { return p.first > q.first; });
  for (const auto& [frac, c] : remainders) {
    if (assigned >= target) break;
    if (quota[c] < static_cast<Eigen::Index>(by_class[c].size())) {
      ++quota[c];
      ++assigned;
    }
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) continue;
    if (quota[c] == 0) quota[c] = 1;
    if (by_class[c].size() == 1) {
      warn(warnings, "class " + std::to_string(c) + " has a single sample; it was placed in training");
    }
  }

  Rng rng(seed);
  TrainTestSplit out;
  out.seed = seed;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto rows = by_class[c];
    shuffle_indices(rows, rng);
    const auto q = static_cast<std::size_t>(quota[c]);
    out.train_rows.insert(out.train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(q));
    out.test_rows.insert(out.test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(q), rows.end());
  }
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = subset_rows(data, out.train_rows);
  out.test = subset_rows(data, out.test_rows);
  return out;
}

/// Mean recall over the classes that occur in true_labels.
[[nodiscard]] inline double balanced_accuracy(const std::vector<int>& true_labels,
                                              const std::vector<int>& predicted) {
  if (true_labels.empty()) throw contract_error("balanced_accuracy: empty input");
  if (true_labels.size() != predicted.size()) {
    throw contract_error("balanced_accuracy: length mismatch");
  }
  std::map<int, std::pair<std::size_t, std::size_t>> tally;  // class -> (correct, total)
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    if (true_labels[i] < 0) throw contract_error("balanced_accuracy: negative class id");
    auto& [correct, total] = tally[true_labels[i]];
    ++total;
    if (predicted[i] == true_labels[i]) ++correct;
  }
  // Recalls are summed in sorted order so the result does not depend on
  // which integer ids the classes carry.
  std::vector<double> recalls;
  for (const auto& [cls, counts] : tally) {
    recalls.push_back(static_cast<double>(counts.first) / static_cast<double>(counts.second));
  }
  std::sort(recalls.begin(), recalls.end());
  double sum = 0.0;
  for (double r : recalls) sum += r;
  return sum / static_cast<double>(recalls.size());
}

// ---------------------------------------------------------------------------
// CART decision tree (Gini impurity, axis-aligned thresholds).

struct DecisionTreeParams {
  int max_depth = -1;  // -1: unbounded
  int min_samples_leaf = 1;
};

class DecisionTree {
 public:
  struct Node {
    Eigen::Index feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    int label = 0;
  };

  [[nodiscard]] static DecisionTree fit(const LabeledData& data, const DecisionTreeParams& params = {}) {
    data.validate();
    if (data.rows() < 1) throw contract_error("DecisionTree::fit: no training rows");
    DecisionTree tree;
    tree.features_ = data.features.cols();
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});

    struct Work {
      int node;
      std::vector<Eigen::Index> rows;
      int depth;
    };
    tree.nodes_.emplace_back();
    std::vector<Work> stack;
    stack.push_back({0, std::move(rows), 0});
    while (!stack.empty()) {
      Work w = std::move(stack.back());
      stack.pop_back();
      tree.depth_ = std::max(tree.depth_, w.depth);

      const auto counts = class_counts(data, w.rows);
      const int majority = static_cast<int>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      tree.nodes_[static_cast<std::size_t>(w.node)].label = majority;

      const bool pure = counts[static_cast<std::size_t>(majority)] == w.rows.size();
      const bool depth_capped = params.max_depth >= 0 && w.depth >= params.max_depth;
      if (pure || depth_capped ||
          w.rows.size() < 2 * static_cast<std::size_t>(std::max(1, params.min_samples_leaf))) {
        continue;
      }
      const auto split = best_split(data, w.rows, counts, params.min_samples_leaf);
      if (!split) continue;

      std::vector<Eigen::Index> left;
      std::vector<Eigen::Index> right;
      for (auto r : w.rows) {
        (data.features(r, split->first) <= split->second ? left : right).push_back(r);
      }
      const int li = static_cast<int>(tree.nodes_.size());
      tree.nodes_.emplace_back();
      const int ri = static_cast<int>(tree.nodes_.size());
      tree.nodes_.emplace_back();
      auto& node = tree.nodes_[static_cast<std::size_t>(w.node)];
      node.feature = split->first;
      node.threshold = split->second;
      node.left = li;
      node.right = ri;
      stack.push_back({ri, std::move(right), w.depth + 1});
      stack.push_back({li, std::move(left), w.depth + 1});
    }
    return tree;
  }

  [[nodiscard]] int predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    std::size_t at = 0;
    while (nodes_[at].feature >= 0) {
      const auto& n = nodes_[at];
      at = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
    }
    return nodes_[at].label;
  }

  [[nodiscard]] std::vector<int> predict(const Matrix& x) const {
    if (x.cols() != features_) throw contract_error("DecisionTree::predict: feature count mismatch");
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict_row(x.row(i));
    return out;
  }

  [[nodiscard]] int depth() const { return depth_; }
  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
  [[nodiscard]] std::size_t split_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature >= 0; }));
  }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }

 private:
  static std::vector<std::size_t> class_counts(const LabeledData& d,
                                               const std::vector<Eigen::Index>& rows) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(d.class_count), 0);
    for (auto r : rows) ++counts[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(r)])];
    return counts;
  }

  static double gini_sum(const std::vector<std::size_t>& counts, std::size_t n) {
    // n * gini = n - sum(c^2) / n
    if (n == 0) return 0.0;
    double sq = 0.0;
    for (auto c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
    return static_cast<double>(n) - sq / static_cast<double>(n);
  }

  // Minimises the weighted child impurity even when it does not improve on
  // the parent: XOR-like data needs a zero-gain first split.
  static std::optional<std::pair<Eigen::Index, double>> best_split(
      const LabeledData& d, const std::vector<Eigen::Index>& rows,
      const std::vector<std::size_t>& counts, int min_leaf) {
    const std::size_t n = rows.size();
    const auto leaf = static_cast<std::size_t>(std::max(1, min_leaf));
    std::optional<std::pair<Eigen::Index, double>> best;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> order = rows;
    for (Eigen::Index f = 0; f < d.features.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index p, Eigen::Index q) {
        return d.features(p, f) < d.features(q, f);
      });
      std::vector<std::size_t> left(counts.size(), 0);
      std::vector<std::size_t> right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto y = static_cast<std::size_t>(d.labels[static_cast<std::size_t>(order[i])]);
        ++left[y];
        --right[y];
        const double a = d.features(order[i], f);
        const double b = d.features(order[i + 1], f);
        if (!(a < b) || i + 1 < leaf || n - i - 1 < leaf) continue;
        const double score = gini_sum(left, i + 1) + gini_sum(right, n - i - 1);
        if (score < best_score) {
          best_score = score;
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = std::make_pair(f, mid);
        }
      }
    }
    return best;
  }

  std::vector<Node> nodes_;
  Eigen::Index features_ = 0;
  int depth_ = 0;
};

// ---------------------------------------------------------------------------
// k-nearest neighbours.

/// Majority vote of the k nearest training rows (Euclidean, distance ties to
/// the lower row). Vote ties go to the tied class that appears first in
/// neighbour order, i.e. the nearest neighbour's class when it is tied.
[[nodiscard]] inline std::vector<int> knn_predict(const LabeledData& train, const Matrix& query,
                                                  int k_neighbors, Warnings* warnings = nullptr) {
  train.validate();
  if (k_neighbors < 1) throw contract_error("knn_predict: k_neighbors must be >= 1");
  if (train.rows() < 1) throw contract_error("knn_predict: empty training set");
  if (query.cols() != train.features.cols()) throw contract_error("knn_predict: feature count mismatch");
  auto k = static_cast<std::size_t>(k_neighbors);
  if (k > static_cast<std::size_t>(train.rows())) {
    warn(warnings, "knn_predict: k_neighbors " + std::to_string(k_neighbors) +
                       " exceeds training size; clamped to " + std::to_string(train.rows()));
    k = static_cast<std::size_t>(train.rows());
  }

  std::vector<int> out(static_cast<std::size_t>(query.rows()));
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(train.rows()));
  std::vector<std::size_t> votes(static_cast<std::size_t>(train.class_count));
  for (Eigen::Index q = 0; q < query.rows(); ++q) {
    for (Eigen::Index r = 0; r < train.rows(); ++r) {
      dist[static_cast<std::size_t>(r)] = {(train.features.row(r) - query.row(q)).squaredNorm(), r};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
      ++votes[static_cast<std::size_t>(train.labels[static_cast<std::size_t>(dist[i].second)])];
    }
    const std::size_t top = *std::max_element(votes.begin(), votes.end());
    int winner = -1;
    for (std::size_t i = 0; i < k && winner < 0; ++i) {
      const int y = train.labels[static_cast<std::size_t>(dist[i].second)];
      if (votes[static_cast<std::size_t>(y)] == top) winner = y;
    }
    out[static_cast<std::size_t>(q)] = winner;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pluggable classifier used by the pipeline.

enum class ClassifierKind { decision_tree, knn };

/// Fits on `train` and returns predictions for `query`.
using FitPredict = std::function<std::vector<int>(const LabeledData& train, const Matrix& query)>;

struct ClassifierParams {
  DecisionTreeParams tree;
  int knn_neighbors = 3;
};

[[nodiscard]] inline FitPredict make_classifier(ClassifierKind kind, const ClassifierParams& params = {}) {
  if (kind == ClassifierKind::decision_tree) {
    return [tree = params.tree](const LabeledData& train, const Matrix& query) {
      return DecisionTree::fit(train, tree).predict(query);
    };
  }
  return [k = params.knn_neighbors](const LabeledData& train, const Matrix& query) {
    return knn_predict(train, query, k);
  };
}

/// Balanced test accuracy of `classifier` restricted to the columns in `subset`.
[[nodiscard]] inline double score_subset(const FitPredict& classifier, const TrainTestSplit& split,
                                         const std::vector<Eigen::Index>& subset) {
  const LabeledData train = subset_columns(split.train, subset);
  const Matrix query = select_columns(split.test.features, subset);
  return balanced_accuracy(split.test.labels, classifier(train, query));
}

}  // namespace pfs
