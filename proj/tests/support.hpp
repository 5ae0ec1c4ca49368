#pragma once

// Shared generators for the test suites. Everything is seeded; no test draws
// from a time-based source.

#include <filesystem>
#include <fstream>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pfs::test {

/// Seed used wherever a test needs "the" seeded SynthData sample.
inline constexpr std::uint64_t kSynthSeed = 20190318;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gaussian generator independent of the library's own Rng.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Matrix gaussian(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }
  Vector gaussian(Eigen::Index n) { return gaussian(n, 1).col(0); }

  /// rows x cols matrix of exact rank `rank` (product of Gaussian factors).
  Matrix of_rank(Eigen::Index rows, Eigen::Index cols, Eigen::Index rank) {
    if (rank == 0) return Matrix::Zero(rows, cols);
    return gaussian(rows, rank) * gaussian(rank, cols);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Orthonormal basis of the null space of a, from a full SVD computed here
/// rather than through the library.
inline Matrix null_space(const Matrix& a, double tol = 1e-9) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > tol * std::max(1.0, s[0])) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

inline double cosine(const Vector& u, const Vector& v) { return u.dot(v) / (u.norm() * v.norm()); }

/// Directory under the build tree, cleaned on construction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("pfs_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace pfs::test
