// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
// Usage: pfs_acceptance [path-to-pfs-executable]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pfs/pfs.hpp"
#include "support.hpp"

namespace {

using namespace pfs;
using test::Gen;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;  // <= 0: no runtime limit
  std::function<Verdict()> body;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Least-squares optimality and minimum norm on random systems.
Verdict least_squares_suite() {
  Verdict v;
  Gen g(1001);
  double worst_ls = -1e300, worst_norm = -1e300;
  int deficient = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = g.integer(1, 12);
    const Eigen::Index n = g.integer(1, 12);
    const Eigen::Index full = std::min(m, n);
    // Half the systems are rank-deficient by construction.
    const Eigen::Index rank = trial % 2 == 0 ? full : g.integer(0, static_cast<int>(full) - 1);
    const Matrix a = g.of_rank(m, n, rank);
    const Vector b = g.gaussian(m);
    const auto s = linalg::min_norm_least_squares(a, b);
    for (int p = 0; p < 100; ++p) {
      const Vector y = g.gaussian(n) * std::pow(10.0, g.uniform(-8, 2)) + (p % 2 == 0 ? s.x : Vector::Zero(n));
      worst_ls = std::max(worst_ls, s.residual_norm - (a * y - b).norm());
    }
    const Matrix kernel = test::null_space(a);
    if (kernel.cols() > 0) ++deficient;
    for (int p = 0; p < 50 && kernel.cols() > 0; ++p) {
      const Vector q = kernel * g.gaussian(kernel.cols()) * std::pow(10.0, g.uniform(-8, 2));
      worst_norm = std::max(worst_norm, s.x.norm() - (s.x + q).norm());
    }
  }
  v.require(worst_ls <= 1e-9, "least-squares slack exceeded: " + fmt("%.3g", worst_ls));
  v.require(worst_norm <= 1e-9, "minimum-norm slack exceeded: " + fmt("%.3g", worst_norm));
  v.detail = v.pass ? "200 systems (" + std::to_string(deficient) + " rank-deficient); worst ls slack " +
                          fmt("%.2g", worst_ls) + ", worst norm slack " + fmt("%.2g", worst_norm)
                    : v.detail;
  return v;
}

// 2. Singular-value drift bounded by ||E||_2.
Verdict weyl_suite() {
  Verdict v;
  Gen g(1002);
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = g.integer(2, 12);
    const Eigen::Index n = g.integer(2, 12);
    const Matrix a = g.gaussian(m, n);
    const Vector sa = linalg::singular_values(a);
    const double sigma_min = linalg::smallest_nonzero_singular_value(sa, m, n);
    PerturbationConfig cfg;
    cfg.mode = PerturbationMode::sigma_scaled;
    cfg.s = 3 + g.integer(0, 3);
    cfg.seed = static_cast<std::uint64_t>(trial);
    const Matrix e = generate_perturbation(m, n, cfg, a.minCoeff(), a.maxCoeff(), sigma_min);
    const double e_norm = Eigen::JacobiSVD<Matrix>(e).singularValues()[0];
    const double gap = weyl_gap(sa, linalg::singular_values(a + e));
    v.require(e_norm <= 1e-3 * sigma_min * (1 + 1e-12), "trial " + std::to_string(trial) + ": ||E|| too large");
    v.require(gap <= e_norm, "trial " + std::to_string(trial) + ": gap " + fmt("%.6g", gap) + " > ||E|| " +
                                 fmt("%.6g", e_norm));
    worst_ratio = std::max(worst_ratio, gap / e_norm);
  }
  if (v.pass) v.detail = "100 pairs; max gap/||E||_2 = " + fmt("%.4f", worst_ratio);
  return v;
}

// 3. Dependence structure of SynthData.
Verdict synth_structure() {
  Verdict v;
  const Dataset d = synth_data(100, test::kSynthSeed);
  const PreparedSystem sys = prepare_system(d.a, d.b, true);
  PerturbationConfig cfg;
  cfg.mode = PerturbationMode::sigma_scaled;
  cfg.s = 3;
  cfg.seed = test::kSynthSeed;
  const auto out = perturb_and_solve(sys.a, sys.b, cfg);
  Vector target(3);
  target << 0.97, 0.23, -1.0;
  // x - x~ along a null vector carries an arbitrary overall sign.
  const double cos = std::abs(test::cosine(out.difference.segment(2, 3), target));
  const auto groups = detect_dependence_groups(out.delta);
  const bool pair = std::find(groups.groups.begin(), groups.groups.end(),
                              std::vector<Eigen::Index>{1, 5}) != groups.groups.end();
  v.require(out.delta[0] <= 1e-3, "delta_1 = " + fmt("%.3g", out.delta[0]));
  v.require(cos >= 0.999, "cosine = " + fmt("%.6f", cos));
  v.require(pair, "{f2, f6} not grouped");
  if (v.pass) {
    v.detail = "delta_1 = " + fmt("%.2e", out.delta[0]) + ", cosine = " + fmt("%.6f", cos) +
               ", {f2,f6} grouped";
  }
  return v;
}

// Informational companion to 3: the uncentred system against the exact
// unit-norm coefficients of f5 = 8 f3 + 2 f4 for this sample.
void synth_structure_uncentred() {
  const Dataset d = synth_data(100, test::kSynthSeed);
  const PreparedSystem sys = prepare_system(d.a, d.b, false);
  PerturbationConfig cfg;
  cfg.mode = PerturbationMode::sigma_scaled;
  cfg.seed = test::kSynthSeed;
  const auto out = perturb_and_solve(sys.a, sys.b, cfg);
  Vector exact(3);
  exact << 8.0 * d.a.col(2).norm() / d.a.col(4).norm(), 2.0 * d.a.col(3).norm() / d.a.col(4).norm(), -1.0;
  Vector target(3);
  target << 0.97, 0.23, -1.0;
  const Vector diff = out.difference.segment(2, 3);
  std::printf("   info: uncentred: exact vector (%.3f, %.3f, -1), |cosine| %.6f; vs (0.97, 0.23, -1) %.6f\n",
              exact[0], exact[1], std::abs(test::cosine(diff, exact)), std::abs(test::cosine(diff, target)));
}

// 4. Balanced accuracy against an explicit per-class tally.
Verdict balanced_accuracy_oracle() {
  Verdict v;
  Gen g(1004);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = g.integer(1, 80);
    const int s = g.integer(1, 6);
    std::vector<int> t(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      t[static_cast<std::size_t>(i)] = g.integer(0, s - 1);
      p[static_cast<std::size_t>(i)] = g.integer(0, s - 1);
    }
    std::map<int, std::pair<int, int>> tally;
    for (int i = 0; i < n; ++i) {
      auto& [hit, total] = tally[t[static_cast<std::size_t>(i)]];
      ++total;
      hit += p[static_cast<std::size_t>(i)] == t[static_cast<std::size_t>(i)];
    }
    double sum = 0.0;
    for (const auto& [c, ht] : tally) sum += static_cast<double>(ht.first) / ht.second;
    worst = std::max(worst, std::abs(balanced_accuracy(t, p) - sum / static_cast<double>(tally.size())));
  }
  v.require(worst <= 1e-12, "max deviation " + fmt("%.3g", worst));
  if (v.pass) v.detail = "1000 pairs; max deviation " + fmt("%.2g", worst);
  return v;
}

// 5. Published measure cells.
Verdict measure_cells() {
  Verdict v;
  const double lsvt = measure(85.26, 45.30);
  const double madelon = measure(81.45, 100.80);
  v.require(fmt("%.2f", lsvt) == "1.88", "LSVT " + fmt("%.4f", lsvt));
  v.require(fmt("%.2f", madelon) == "0.81", "Madelon " + fmt("%.4f", madelon));
  if (v.pass) v.detail = "LSVT " + fmt("%.4f", lsvt) + " -> 1.88, Madelon " + fmt("%.4f", madelon) + " -> 0.81";
  return v;
}

// 6. Exact duplicates are never selected together.
Verdict redundancy_elimination() {
  Verdict v;
  const Dataset d = synth_data(100, test::kSynthSeed, Task::classification);
  PfsConfig cfg;
  cfg.t = 10;
  cfg.clustering = ClusteringMethod::kmeans;
  cfg.inner = ClassifierKind::decision_tree;
  const PfsReport r = run_pfs(d, cfg);
  const auto& opt = r.subset_optimal;
  const bool both = std::count(opt.begin(), opt.end(), 1) && std::count(opt.begin(), opt.end(), 5);
  v.require(!both, "optimal subset contains f2 and f6");
  int co_best = 0, co_all = 0, candidates = 0, any_both = 0;
  for (const auto& run : r.runs) {
    co_best += run.best_assignment[1] == run.best_assignment[5];
    const auto& s = run.best_subset;
    any_both += std::count(s.begin(), s.end(), 1) && std::count(s.begin(), s.end(), 5);
    for (const auto& c : run.sweep) {
      ++candidates;
      co_all += c.assignment[1] == c.assignment[5];
    }
  }
  v.require(co_best == 10, "f2/f6 co-clustered in " + std::to_string(co_best) + "/10 runs");
  v.require(any_both == 0, "a run selected both f2 and f6");
  if (v.pass) {
    v.detail = "f2/f6 co-clustered in 10/10 runs (" + std::to_string(co_all) + "/" +
               std::to_string(candidates) + " sweep clusterings); optimal subset size " +
               std::to_string(opt.size());
  }
  return v;
}

// 7. Byte-identical reports across invocations and --jobs.
Verdict determinism(const std::string& exe) {
  Verdict v;
  test::ScratchDir dir("acceptance_c7");
  const std::string csv = dir.file("synth.csv");
  write_csv(csv, synth_data(100, test::kSynthSeed, Task::classification));
  auto run = [&](const std::string& out, const std::string& extra) {
    const std::string cmd = "\"" + exe + "\" select --input \"" + csv + "\" --seed 7 " + extra + " --out \"" +
                            out + "\" > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const std::string a = dir.file("a.json"), b = dir.file("b.json"), c = dir.file("c.json"),
                    e = dir.file("e.json");
  v.require(run(a, "") == 0 && run(b, "") == 0 && run(c, "--jobs 4") == 0 && run(e, "--jobs 3 --t 10") == 0,
            "pfs select failed");
  const std::string ta = test::slurp(a);
  v.require(!ta.empty(), "empty report");
  v.require(ta == test::slurp(b), "two invocations differ");
  v.require(ta == test::slurp(c), "--jobs 4 differs from --jobs 1");
  v.require(ta == test::slurp(e), "--jobs 3 --t 10 differs from defaults");
  if (v.pass) v.detail = "4 invocations, " + std::to_string(ta.size()) + " bytes each, identical";
  return v;
}

// 8. --k 3 selects exactly three features per run.
Verdict k_override() {
  Verdict v;
  Gen g(1008);
  std::vector<Dataset> sets{synth_data(100, test::kSynthSeed, Task::classification), synth_data(60, 5)};
  for (int i = 0; i < 6; ++i) {
    Dataset d;
    const int base = g.integer(3, 8);
    const int rank = g.integer(3, base);
    const int n = base + i % 2;
    d.a.resize(50, n);
    d.a.leftCols(base) = g.of_rank(50, base, rank);
    if (n > base) d.a.col(base) = d.a.col(0);  // exact duplicate
    for (int j = 0; j < n; ++j) d.feature_names.push_back("x" + std::to_string(j));
    d.target_name = "y";
    d.b = d.a * g.gaussian(n) + 0.2 * g.gaussian(50);
    for (Eigen::Index r = 0; r < 50; ++r) d.b_raw.push_back(std::to_string(d.b[r]));
    d.task = Task::regression;
    sets.push_back(d);
  }
  int runs = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    v.require(linalg::numerical_rank(sets[i].a) >= 3, "dataset rank < 3");
    PfsConfig cfg;
    cfg.t = 5;
    cfg.k_override = 3;
    cfg.master_seed = i;
    for (auto method : {ClusteringMethod::kmeans, ClusteringMethod::cmeans}) {
      cfg.clustering = method;
      for (const auto& run : run_pfs(sets[i], cfg).runs) {
        ++runs;
        v.require(run.best_subset.size() == 3, "dataset " + std::to_string(i) + " run " +
                                                   std::to_string(run.run) + ": " +
                                                   std::to_string(run.best_subset.size()) + " features");
      }
    }
  }
  if (v.pass) v.detail = std::to_string(runs) + " runs over " + std::to_string(sets.size()) + " datasets, all size 3";
  return v;
}

// 9. Clustering invariants.
Verdict clustering_invariants() {
  Verdict v;
  Gen g(1009);
  double worst_rowsum = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index distinct = g.integer(3, 25);
    const Matrix base = g.gaussian(distinct, 3);
    std::vector<Eigen::Index> src(static_cast<std::size_t>(distinct));
    std::iota(src.begin(), src.end(), Eigen::Index{0});
    for (int extra = g.integer(0, 8); extra > 0; --extra) src.push_back(g.integer(0, static_cast<int>(distinct) - 1));
    std::shuffle(src.begin(), src.end(), g.engine());
    Matrix p(static_cast<Eigen::Index>(src.size()), 3);
    for (std::size_t i = 0; i < src.size(); ++i) p.row(static_cast<Eigen::Index>(i)) = base.row(src[i]);
    const int k = g.integer(2, static_cast<int>(std::min<Eigen::Index>(distinct, 8)));
    const std::string tag = "table " + std::to_string(trial);

    const auto km = kmeans(p, k, static_cast<std::uint64_t>(trial));
    for (std::size_t i = 1; i < km.inertia_history.size(); ++i) {
      v.require(km.inertia_history[i] <= km.inertia_history[i - 1] * (1.0 + 1e-12) + 1e-15,
                tag + ": k-means inertia increased at step " + std::to_string(i));
    }
    const auto fc = fuzzy_cmeans(p, k, static_cast<std::uint64_t>(trial));
    for (Eigen::Index i = 0; i < fc.memberships.rows(); ++i) {
      worst_rowsum = std::max(worst_rowsum, std::abs(fc.memberships.row(i).sum() - 1.0));
    }
    for (std::size_t i = 0; i < src.size(); ++i) {
      for (std::size_t j = i + 1; j < src.size(); ++j) {
        if (src[i] != src[j]) continue;
        v.require(km.assignment[i] == km.assignment[j], tag + ": coincident rows split by k-means");
        v.require(fc.assignment[i] == fc.assignment[j], tag + ": coincident rows split by c-means");
      }
    }
  }
  v.require(worst_rowsum <= 1e-12, "membership row-sum deviation " + fmt("%.3g", worst_rowsum));
  if (v.pass) v.detail = "100 tables; max membership row-sum deviation " + fmt("%.2g", worst_rowsum);
  return v;
}

// 10. Class-id and outcome-scale insensitivity.
Verdict insensitivity() {
  Verdict v;
  Gen g(1010);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = g.integer(2, 60);
    const int s = g.integer(2, 6);
    std::vector<int> t(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      t[static_cast<std::size_t>(i)] = g.integer(0, s - 1);
      p[static_cast<std::size_t>(i)] = g.integer(0, s - 1);
    }
    std::vector<int> perm(static_cast<std::size_t>(s));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g.engine());
    std::vector<int> t2, p2;
    for (int x : t) t2.push_back(perm[static_cast<std::size_t>(x)]);
    for (int x : p) p2.push_back(perm[static_cast<std::size_t>(x)]);
    v.require(balanced_accuracy(t, p) == balanced_accuracy(t2, p2),
              "instance " + std::to_string(trial) + ": relabeling changed balanced accuracy");
  }
  auto order = [](const Vector& x) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    return idx;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index m = g.integer(5, 60);
    const Eigen::Index n = g.integer(2, 10);
    const Matrix a = g.gaussian(m, n);
    const Vector b = g.gaussian(m);
    const double c = std::pow(10.0, g.uniform(-4, 4));
    v.require(order(angles_to_outcome(a, b)) == order(angles_to_outcome(a, c * b)),
              "instance " + std::to_string(trial) + ": theta ranking changed under b -> c b");
  }
  if (v.pass) v.detail = "50 relabelings, 50 rescalings";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string exe = argc > 1 ? argv[1] : "pfs";
  const std::vector<Criterion> criteria{
      {1, "least-squares optimality and minimum norm", 5.0, least_squares_suite},
      {2, "singular-value drift bounded by ||E||_2", 5.0, weyl_suite},
      {3, "SynthData dependence structure", 1.0, synth_structure},
      {4, "balanced accuracy oracle", 0.0, balanced_accuracy_oracle},
      {5, "measure arithmetic", 0.0, measure_cells},
      {6, "duplicate features not selected together", 30.0, redundancy_elimination},
      {7, "byte-identical reports", 0.0, [&] { return determinism(exe); }},
      {8, "--k 3 selects three features", 0.0, k_override},
      {9, "clustering invariants", 0.0, clustering_invariants},
      {10, "class-id and outcome-scale insensitivity", 0.0, insensitivity},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0 && secs >= c.limit_seconds) {
      v.pass = false;
      v.detail += " (runtime " + fmt("%.3f", secs) + " s exceeds " + fmt("%.0f", c.limit_seconds) + " s)";
    }
    std::printf("C%-2d %s  %s [%.3f s] %s\n", c.id, v.pass ? "PASS" : "FAIL", c.title.c_str(), secs,
                v.detail.c_str());
    if (c.id == 3) synth_structure_uncentred();
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
