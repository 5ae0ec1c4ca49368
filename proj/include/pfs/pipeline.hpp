#pragma once

// Perturbation-based feature selection, end to end.
//
// Each of t runs reshuffles and resplits the data 70/30, builds the n x 3
// characteristics table on the training rows with a fresh perturbation,
// clusters it for every k in [2, rank(A)] (or a fixed k), keeps the cluster
// representatives that score best with the inner classifier on the held-out
// rows, and records that subset. Runs are then averaged and the run with the
// best accuracy-per-feature is reported as optimal.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pfs/characteristics.hpp"
#include "pfs/classify.hpp"
#include "pfs/clustering.hpp"
#include "pfs/dataio.hpp"
#include "pfs/errors.hpp"
#include "pfs/linalg.hpp"
#include "pfs/perturbation.hpp"
#include "pfs/random.hpp"

namespace pfs {

inline constexpr std::uint64_t kDefaultSeed = 20190318;

struct PfsConfig {
  int t = 10;
  PerturbationConfig perturbation;  // seed is ignored; derived per run
  ClusteringMethod clustering = ClusteringMethod::kmeans;
  ClusteringOptions clustering_options;
  ClassifierKind inner = ClassifierKind::decision_tree;
  ClassifierParams classifier_params;
  std::optional<int> k_override;
  std::uint64_t master_seed = kDefaultSeed;
  bool center = true;
  int jobs = 1;  // worker threads; never changes the result
  /// Replaces the built-in inner classifier when set.
  FitPredict custom_inner;
};

struct Candidate {
  int k = 0;
  std::vector<Eigen::Index> subset;  // ascending feature indices
  double accuracy = 0.0;
  std::vector<int> assignment;  // cluster per feature, -1 for excluded columns
};

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  Eigen::Index rank = 0;
  int best_k = 0;
  std::vector<Eigen::Index> best_subset;
  std::vector<int> best_assignment;
  double best_accuracy = 0.0;   // inner classifier, balanced, test rows
  double outer_accuracy = 0.0;  // decision tree on best_subset, same split
  std::vector<Candidate> sweep;
};

struct PfsReport {
  std::vector<RunRecord> runs;
  double acc_average = 0.0;
  double outer_acc_average = 0.0;
  double subset_size_average = 0.0;
  int optimal_run = 0;
  double acc_optimal = 0.0;
  std::vector<Eigen::Index> subset_optimal;
  double measure_optimal = 0.0;
  Warnings warnings;
};

/// Accuracy (percent) per selected feature; larger is better.
[[nodiscard]] inline double measure(double accuracy_percent, double n_selected) {
  if (!(n_selected > 0.0)) throw contract_error("measure: number of selected features must be > 0");
  return accuracy_percent / n_selected;
}

/// Highest accuracy; ties to the smaller subset, then the smaller k.
[[nodiscard]] inline Candidate best_in_run(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw contract_error("best_in_run: no candidates");
  const Candidate* best = &candidates.front();
  for (const auto& c : candidates) {
    const bool better =
        c.accuracy > best->accuracy ||
        (c.accuracy == best->accuracy &&
         (c.subset.size() < best->subset.size() ||
          (c.subset.size() == best->subset.size() && c.k < best->k)));
    if (better) best = &c;
  }
  return *best;
}

/// Min-max scales every feature column and the target to [0, 1].
/// Constant columns become zeros and are reported.
[[nodiscard]] inline Dataset normalize_dataset(const Dataset& d, Warnings* warnings = nullptr) {
  d.validate();
  Dataset out = d;
  for (auto j : scale_columns_to_unit_interval(out.a)) {
    warn(warnings, "feature '" + d.feature_names[static_cast<std::size_t>(j)] +
                       "' is constant; normalized to zeros");
  }
  Matrix target = out.b;
  if (!scale_columns_to_unit_interval(target).empty()) warn(warnings, "target is constant");
  out.b = target.col(0);
  return out;
}

namespace detail {

inline RunRecord run_once(const Dataset& normalized, const PfsConfig& cfg, int run,
                          const FitPredict& inner, const FitPredict& outer, Warnings& warnings) {
  RunRecord rec;
  rec.run = run;
  rec.seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(run));

  const Dataset shuffled = shuffle_rows(normalized, mix_seed(rec.seed, 0));
  const LabeledData labeled{shuffled.a, shuffled.labels,
                            static_cast<int>(shuffled.class_names.size())};
  const TrainTestSplit split = split_70_30(labeled, mix_seed(rec.seed, 1), &warnings);

  Vector train_b(static_cast<Eigen::Index>(split.train_rows.size()));
  for (std::size_t i = 0; i < split.train_rows.size(); ++i) {
    train_b[static_cast<Eigen::Index>(i)] = shuffled.b[split.train_rows[i]];
  }
  const PreparedSystem prepared =
      prepare_system(split.train.features, train_b, cfg.center, &warnings);

  PerturbationConfig pcfg = cfg.perturbation;
  pcfg.seed = mix_seed(rec.seed, 2);
  const Characteristics chars = build_characteristics(prepared.a, prepared.b, pcfg);
  rec.rank = chars.perturbation.rank;

  const auto n_kept = static_cast<int>(prepared.kept.size());
  std::vector<int> ks;
  if (cfg.k_override) {
    if (*cfg.k_override > n_kept) {
      throw contract_error("k = " + std::to_string(*cfg.k_override) + " exceeds the " +
                           std::to_string(n_kept) + " usable features");
    }
    ks.push_back(*cfg.k_override);
  } else {
    if (rec.rank < 2) {
      throw degenerate_error("numerical rank of A is " + std::to_string(rec.rank) +
                             "; at least 2 is required");
    }
    const int k_max = static_cast<int>(std::min<Eigen::Index>(rec.rank, n_kept));
    for (int k = 2; k <= k_max; ++k) ks.push_back(k);
  }

  const Matrix points = chars.table.scaled();
  for (int k : ks) {
    const ClusterSelection sel =
        cluster(cfg.clustering, points, k, mix_seed(rec.seed, 100 + static_cast<std::uint64_t>(k)),
                cfg.clustering_options);
    Candidate cand;
    cand.k = k;
    cand.assignment.assign(static_cast<std::size_t>(normalized.cols()), -1);
    for (std::size_t i = 0; i < prepared.kept.size(); ++i) {
      cand.assignment[static_cast<std::size_t>(prepared.kept[i])] = sel.assignment[i];
    }
    for (auto f : sel.centroid_features) cand.subset.push_back(prepared.kept[static_cast<std::size_t>(f)]);
    std::sort(cand.subset.begin(), cand.subset.end());
    cand.accuracy = score_subset(inner, split, cand.subset);
    rec.sweep.push_back(std::move(cand));
  }

  const Candidate best = best_in_run(rec.sweep);
  rec.best_k = best.k;
  rec.best_subset = best.subset;
  rec.best_assignment = best.assignment;
  rec.best_accuracy = best.accuracy;
  rec.outer_accuracy = score_subset(outer, split, best.subset);
  return rec;
}

}  // namespace detail

/// Runs the whole selection procedure. Regression targets are thresholded at
/// their median first. Identical config (apart from jobs) gives an identical report.
[[nodiscard]] inline PfsReport run_pfs(const Dataset& dataset, const PfsConfig& cfg) {
  dataset.validate();
  cfg.perturbation.validate();
  if (cfg.t < 1) throw contract_error("run_pfs: t must be >= 1");
  if (dataset.cols() < 2) throw contract_error("run_pfs: need at least 2 features");
  if (cfg.k_override && (*cfg.k_override < 2 || *cfg.k_override > dataset.cols())) {
    throw contract_error("run_pfs: k must lie in [2, " + std::to_string(dataset.cols()) + "]");
  }

  PfsReport report;
  const Dataset labeled =
      dataset.task == Task::classification ? dataset : threshold_at_median(dataset);
  if (labeled.class_names.size() < 2) throw degenerate_error("run_pfs: need at least 2 classes");
  const Dataset normalized = normalize_dataset(labeled, &report.warnings);

  const FitPredict inner =
      cfg.custom_inner ? cfg.custom_inner : make_classifier(cfg.inner, cfg.classifier_params);
  const FitPredict outer = make_classifier(ClassifierKind::decision_tree, cfg.classifier_params);

  const auto t = static_cast<std::size_t>(cfg.t);
  std::vector<RunRecord> runs(t);
  std::vector<Warnings> run_warnings(t);
  std::vector<std::exception_ptr> errors(t);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < t; r = next++) {
      try {
        runs[r] = detail::run_once(normalized, cfg, static_cast<int>(r), inner, outer, run_warnings[r]);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::clamp(cfg.jobs, 1, cfg.t));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t r = 0; r < t; ++r) {
    for (auto& w : run_warnings[r]) {
      if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end()) {
        report.warnings.push_back(w);
      }
    }
  }

  double best_measure = -1.0;
  for (const auto& rec : runs) {
    report.acc_average += rec.best_accuracy;
    report.outer_acc_average += rec.outer_accuracy;
    report.subset_size_average += static_cast<double>(rec.best_subset.size());
    const double m = measure(100.0 * rec.best_accuracy, static_cast<double>(rec.best_subset.size()));
    if (m > best_measure) {
      best_measure = m;
      report.optimal_run = rec.run;
    }
  }
  const auto td = static_cast<double>(t);
  report.acc_average /= td;
  report.outer_acc_average /= td;
  report.subset_size_average /= td;
  const RunRecord& opt = runs[static_cast<std::size_t>(report.optimal_run)];
  report.acc_optimal = opt.best_accuracy;
  report.subset_optimal = opt.best_subset;
  report.measure_optimal = best_measure;
  report.runs = std::move(runs);
  return report;
}

}  // namespace pfs
