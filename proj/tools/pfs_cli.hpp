#pragma once

// Command-line front end: select, synth, deps, report.
//
// Exit codes: 0 ok, 2 usage error, 3 data error, 4 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pfs/pfs.hpp"

namespace pfs::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

inline constexpr const char* kSeedEnv = "PFS_SEED";

/// Default seed, overridable through PFS_SEED.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != nullptr && *end == '\0') return v;
    throw CLI::ValidationError(std::string(kSeedEnv) + " must be an unsigned integer");
  }
  return kDefaultSeed;
}

struct InputFlags {
  std::string path;
  std::string target;
  bool no_header = false;
  std::string task = "auto";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--input", path, "Input CSV")->required();
    cmd->add_option("--target", target, "Target column name or zero-based index (default: last)");
    cmd->add_flag("--no-header", no_header, "First row is data, not names");
    cmd->add_option("--task", task, "Target type")
        ->check(CLI::IsMember({"auto", "classification", "regression"}));
  }

  [[nodiscard]] Dataset load() const {
    CsvOptions opts;
    opts.has_header = !no_header;
    opts.target = target;
    opts.task = task == "classification" ? TaskHint::classification
                : task == "regression"   ? TaskHint::regression
                                         : TaskHint::automatic;
    return load_csv(path, opts);
  }
};

inline const std::map<std::string, PerturbationMode> kModes{
    {"algorithm1", PerturbationMode::algorithm1}, {"sigma_scaled", PerturbationMode::sigma_scaled}};

struct PerturbFlags {
  std::string mode;
  double c_l = 1e6;
  double c_u = 1e5;
  int s = 3;
  bool no_center = false;

  void add_to(CLI::App* cmd, const std::string& default_mode) {
    mode = default_mode;
    cmd->add_option("--mode", mode, "Perturbation mode")->capture_default_str()
        ->check(CLI::IsMember({"algorithm1", "sigma_scaled"}));
    cmd->add_option("--c-l", c_l, "Lower scale divisor for algorithm1 mode")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--c-u", c_u, "Upper scale divisor for algorithm1 mode")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--s", s, "||E|| = 10^-s sigma_min in sigma_scaled mode")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--no-center", no_center, "Do not mean-center A and b before unit-norm scaling");
  }

  [[nodiscard]] PerturbationConfig config(std::uint64_t seed) const {
    PerturbationConfig p;
    p.mode = kModes.at(mode);
    p.c_l = c_l;
    p.c_u = c_u;
    p.s = s;
    p.seed = seed;
    if (!(p.c_l > p.c_u)) throw CLI::ValidationError("--c-l must be greater than --c-u");
    return p;
  }
};

inline std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

inline int cmd_select(const InputFlags& input, const PfsConfig& cfg, const std::string& out_path,
                      std::ostream& out, std::ostream& err) {
  const Dataset d = input.load();
  const PfsReport report = run_pfs(d, cfg);
  const Json j = report_to_json(report, d, cfg, input.path);
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw data_error(out_path + ": cannot open for writing");
    f << j.dump(2) << '\n';
    if (!f) throw data_error(out_path + ": write failed");
  }
  write_report_table(out, j);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  return kOk;
}

inline int cmd_synth(Eigen::Index m, std::uint64_t seed, const std::string& task,
                     const std::string& out_path, std::ostream& out) {
  const Dataset d =
      synth_data(m, seed, task == "classification" ? Task::classification : Task::regression);
  write_csv(out_path, d);
  out << "wrote " << m << " rows (seed " << seed << ", " << task << ") to " << out_path << '\n';
  return kOk;
}

inline int cmd_deps(const InputFlags& input, const PerturbFlags& pf, std::uint64_t seed,
                    double tol_zero, double tol_group, std::ostream& out, std::ostream& err) {
  Warnings warnings;
  const Dataset d = normalize_dataset(input.load(), &warnings);
  const PreparedSystem sys = prepare_system(d.a, d.b, !pf.no_center, &warnings);
  const PerturbationOutcome po = perturb_and_solve(sys.a, sys.b, pf.config(seed));
  const DependenceGroups groups = detect_dependence_groups(po.delta, tol_zero, tol_group);

  auto name = [&](Eigen::Index i) {
    return d.feature_names[static_cast<std::size_t>(sys.kept[static_cast<std::size_t>(i)])];
  };
  out << "pfs deps: " << input.path << " seed=" << seed << " mode=" << pf.mode << " s=" << pf.s
      << " center=" << (pf.no_center ? "no" : "yes") << "\n";
  out << "rank=" << po.rank << " sigma_min=" << fmt(po.sigma_min) << " ||E||_2=" << fmt(po.e_norm)
      << "\n\nfeature  x - x~          |x - x~|\n";
  for (Eigen::Index i = 0; i < po.delta.size(); ++i) {
    out << std::left << std::setw(8) << name(i) << ' ' << std::setw(15) << fmt(po.difference[i])
        << ' ' << fmt(po.delta[i]) << '\n';
  }
  out << "\nindependent:";
  for (auto i : groups.independent) out << ' ' << name(i);
  out << '\n';
  for (const auto& g : groups.groups) {
    out << "group:";
    for (auto i : g) out << ' ' << name(i);
    out << "  proportionality:";
    for (double v : proportionality_vector(po.difference, g)) out << ' ' << fmt(v, 4);
    out << '\n';
  }
  if (!groups.unmatched.empty()) {
    out << "unmatched:";
    for (auto i : groups.unmatched) out << ' ' << name(i);
    out << '\n';
  }
  for (auto j : sys.dropped) {
    out << "excluded (constant): " << d.feature_names[static_cast<std::size_t>(j)] << '\n';
  }
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return kOk;
}

inline int cmd_report(const std::string& path, std::ostream& out) {
  std::ifstream f(path);
  if (!f) throw data_error(path + ": cannot open file");
  Json j;
  try {
    j = Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": " + e.what());
  }
  try {
    write_report_table(out, j);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": malformed report: " + e.what());
  }
  return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perturbation-based feature selection"};
  app.name("pfs");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  // select
  auto* select = app.add_subcommand("select", "Run feature selection and report the chosen subsets");
  InputFlags sel_in;
  sel_in.add_to(select);
  PerturbFlags sel_pf;
  sel_pf.add_to(select, "algorithm1");
  PfsConfig cfg;
  std::string clustering = "kmeans";
  std::string inner = "dt";
  std::optional<int> k;
  std::string sel_out;
  std::uint64_t sel_seed = seed;
  select->add_option("--t", cfg.t, "Repetitions")->capture_default_str()->check(CLI::PositiveNumber);
  select->add_option("--clustering", clustering, "Clustering method")->capture_default_str()
      ->check(CLI::IsMember({"kmeans", "cmeans"}));
  select->add_option("--inner", inner, "Inner classifier")->capture_default_str()->check(CLI::IsMember({"dt", "knn"}));
  select->add_option("--knn-k", cfg.classifier_params.knn_neighbors, "Neighbours for --inner knn")->capture_default_str()
      ->check(CLI::PositiveNumber);
  select->add_option("--fuzzifier", cfg.clustering_options.fuzzifier, "c-means fuzzifier")->capture_default_str();
  select->add_option("--k", k, "Fixed number of features instead of sweeping 2..rank(A)");
  select->add_option("--seed", sel_seed, "Master seed")->capture_default_str();
  select->add_option("--jobs", cfg.jobs, "Worker threads (does not change results)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  select->add_option("--out", sel_out, "Write the JSON report here");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate the SynthData benchmark as CSV");
  Eigen::Index synth_m = 100;
  std::uint64_t synth_seed = seed;
  std::string synth_task = "regression";
  std::string synth_out;
  synth->add_option("--m", synth_m, "Rows")->capture_default_str()->check(CLI::Range(Eigen::Index{2}, Eigen::Index{100000000}));
  synth->add_option("--seed", synth_seed, "Seed")->capture_default_str();
  synth->add_option("--task", synth_task, "Target type")->capture_default_str()
      ->check(CLI::IsMember({"regression", "classification"}));
  synth->add_option("--out", synth_out, "Output CSV")->required();

  // deps
  auto* deps = app.add_subcommand("deps", "Show perturbation deltas and detected dependence groups");
  InputFlags deps_in;
  deps_in.add_to(deps);
  PerturbFlags deps_pf;
  deps_pf.add_to(deps, "sigma_scaled");
  std::uint64_t deps_seed = seed;
  double tol_zero = 1e-3;
  double tol_group = 1e-2;
  deps->add_option("--seed", deps_seed, "Seed")->capture_default_str();
  deps->add_option("--tol-zero", tol_zero, "Deltas at or below this are independent")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  deps->add_option("--tol-group", tol_group, "Relative delta proximity for grouping")->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  // report
  auto* rep = app.add_subcommand("report", "Print a saved JSON report as a table");
  std::string rep_in;
  rep->add_option("--input", rep_in, "Report file written by select --out")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (select->parsed()) {
      cfg.master_seed = sel_seed;
      cfg.perturbation = sel_pf.config(0);
      cfg.center = !sel_pf.no_center;
      cfg.clustering = clustering == "kmeans" ? ClusteringMethod::kmeans : ClusteringMethod::cmeans;
      cfg.inner = inner == "dt" ? ClassifierKind::decision_tree : ClassifierKind::knn;
      cfg.k_override = k;
      if (!(cfg.clustering_options.fuzzifier > 1.0)) {
        throw CLI::ValidationError("--fuzzifier must be > 1");
      }
      if (k && *k < 2) throw CLI::ValidationError("--k must be >= 2");
      return cmd_select(sel_in, cfg, sel_out, out, err);
    }
    if (synth->parsed()) return cmd_synth(synth_m, synth_seed, synth_task, synth_out, out);
    if (deps->parsed()) return cmd_deps(deps_in, deps_pf, deps_seed, tol_zero, tol_group, out, err);
    if (rep->parsed()) return cmd_report(rep_in, out);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const data_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const contract_error& e) {
    // Flags were valid in isolation but do not fit this dataset (e.g. --k > n).
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const decomposition_error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumeric;
  } catch (const degenerate_error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

}  // namespace pfs::cli
