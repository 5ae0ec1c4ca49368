#pragma once

// Machine-readable selection report (JSON, schema "pfs-report" v1) and the
// human-readable table printed from it. docs/report_format.md describes the
// schema.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pfs/dataio.hpp"
#include "pfs/pipeline.hpp"

namespace pfs {

inline constexpr const char* kReportSchema = "pfs-report";
inline constexpr int kReportSchemaVersion = 1;

using Json = nlohmann::ordered_json;

inline const char* to_string(PerturbationMode m) {
  return m == PerturbationMode::algorithm1 ? "algorithm1" : "sigma_scaled";
}
inline const char* to_string(ClusteringMethod m) {
  return m == ClusteringMethod::kmeans ? "kmeans" : "cmeans";
}
inline const char* to_string(ClassifierKind k) {
  return k == ClassifierKind::decision_tree ? "dt" : "knn";
}

namespace detail {

inline Json names_of(const Dataset& d, const std::vector<Eigen::Index>& subset) {
  Json out = Json::array();
  for (auto i : subset) out.push_back(d.feature_names[static_cast<std::size_t>(i)]);
  return out;
}

inline Json indices_of(const std::vector<Eigen::Index>& subset) {
  Json out = Json::array();
  for (auto i : subset) out.push_back(static_cast<std::int64_t>(i));
  return out;
}

}  // namespace detail

[[nodiscard]] inline Json config_to_json(const PfsConfig& cfg) {
  Json c;
  c["t"] = cfg.t;
  c["seed"] = cfg.master_seed;
  c["perturbation_mode"] = to_string(cfg.perturbation.mode);
  c["c_l"] = cfg.perturbation.c_l;
  c["c_u"] = cfg.perturbation.c_u;
  c["s"] = cfg.perturbation.s;
  c["center"] = cfg.center;
  c["clustering"] = to_string(cfg.clustering);
  c["fuzzifier"] = cfg.clustering_options.fuzzifier;
  c["max_iter"] = cfg.clustering_options.max_iter;
  c["conv_tol"] = cfg.clustering_options.conv_tol;
  c["inner"] = to_string(cfg.inner);
  c["knn_neighbors"] = cfg.classifier_params.knn_neighbors;
  c["k"] = cfg.k_override ? Json(*cfg.k_override) : Json(nullptr);
  return c;
}

/// `source` is echoed as given (typically the input path).
[[nodiscard]] inline Json report_to_json(const PfsReport& report, const Dataset& dataset,
                                         const PfsConfig& cfg, const std::string& source) {
  Json j;
  j["schema"] = kReportSchema;
  j["schema_version"] = kReportSchemaVersion;

  Json& ds = j["dataset"];
  ds["source"] = source;
  ds["rows"] = static_cast<std::int64_t>(dataset.rows());
  ds["features"] = static_cast<std::int64_t>(dataset.cols());
  ds["target"] = dataset.target_name;
  ds["task"] = to_string(dataset.task);
  ds["feature_names"] = dataset.feature_names;

  j["config"] = config_to_json(cfg);

  Json runs = Json::array();
  for (const auto& r : report.runs) {
    Json jr;
    jr["run"] = r.run;
    jr["seed"] = r.seed;
    jr["rank"] = static_cast<std::int64_t>(r.rank);
    jr["best_k"] = r.best_k;
    jr["subset"] = detail::indices_of(r.best_subset);
    jr["subset_names"] = detail::names_of(dataset, r.best_subset);
    jr["clusters"] = r.best_assignment;
    jr["accuracy"] = r.best_accuracy;
    jr["outer_accuracy"] = r.outer_accuracy;
    Json sweep = Json::array();
    for (const auto& c : r.sweep) {
      sweep.push_back({{"k", c.k}, {"size", c.subset.size()}, {"accuracy", c.accuracy}});
    }
    jr["sweep"] = std::move(sweep);
    runs.push_back(std::move(jr));
  }
  j["runs"] = std::move(runs);

  Json& s = j["summary"];
  s["acc_average"] = report.acc_average;
  s["subset_size_average"] = report.subset_size_average;
  s["outer_acc_average"] = report.outer_acc_average;
  s["optimal_run"] = report.optimal_run;
  s["acc_optimal"] = report.acc_optimal;
  s["subset_optimal_size"] = report.subset_optimal.size();
  s["subset_optimal"] = detail::indices_of(report.subset_optimal);
  s["subset_optimal_names"] = detail::names_of(dataset, report.subset_optimal);
  s["measure_optimal"] = report.measure_optimal;

  j["warnings"] = report.warnings;
  return j;
}

/// Throws data_error if `j` is not a report this version understands.
inline void check_report(const Json& j) {
  if (!j.is_object() || j.value("schema", "") != kReportSchema) {
    throw data_error("not a pfs-report document");
  }
  if (j.value("schema_version", 0) != kReportSchemaVersion) {
    throw data_error("unsupported pfs-report schema_version");
  }
}

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string join_names(const Json& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n.get<std::string>();
  }
  return out;
}

}  // namespace detail

/// Accuracies are printed as percentages with 2 decimals, measure with 2.
inline void write_report_table(std::ostream& out, const Json& j) {
  check_report(j);
  const auto& cfg = j.at("config");
  const auto& ds = j.at("dataset");
  out << "pfs select: " << ds.at("source").get<std::string>() << " (" << ds.at("rows").get<std::int64_t>()
      << " rows, " << ds.at("features").get<std::int64_t>() << " features, target '"
      << ds.at("target").get<std::string>() << "')\n";
  out << "seed=" << cfg.at("seed").get<std::uint64_t>() << " t=" << cfg.at("t").get<int>()
      << " clustering=" << cfg.at("clustering").get<std::string>()
      << " inner=" << cfg.at("inner").get<std::string>()
      << " mode=" << cfg.at("perturbation_mode").get<std::string>() << "\n\n";

  out << "run  rank  k    acc%    outer%  features\n";
  for (const auto& r : j.at("runs")) {
    char line[96];
    std::snprintf(line, sizeof line, "%-4d %-5lld %-4d %-7s %-7s ", r.at("run").get<int>(),
                  static_cast<long long>(r.at("rank").get<std::int64_t>()), r.at("best_k").get<int>(),
                  detail::fixed(100.0 * r.at("accuracy").get<double>(), 2).c_str(),
                  detail::fixed(100.0 * r.at("outer_accuracy").get<double>(), 2).c_str());
    out << line << detail::join_names(r.at("subset_names")) << '\n';
  }

  const auto& s = j.at("summary");
  out << "\nACC_average   " << detail::fixed(100.0 * s.at("acc_average").get<double>(), 2) << '\n';
  out << "|CLS_average| " << detail::fixed(s.at("subset_size_average").get<double>(), 2) << '\n';
  out << "ACC_optimal   " << detail::fixed(100.0 * s.at("acc_optimal").get<double>(), 2) << " (run "
      << s.at("optimal_run").get<int>() << ")\n";
  out << "|CLS_optimal| " << s.at("subset_optimal_size").get<std::size_t>() << '\n';
  out << "measure       " << detail::fixed(s.at("measure_optimal").get<double>(), 2) << '\n';
  out << "optimal subset: " << detail::join_names(s.at("subset_optimal_names")) << '\n';
  for (const auto& w : j.at("warnings")) out << "warning: " << w.get<std::string>() << '\n';
}

}  // namespace pfs
