#pragma once

// Dataset ingestion (CSV), class encoding, row shuffling and the SynthData
// generator.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pfs/errors.hpp"
#include "pfs/linalg.hpp"
#include "pfs/random.hpp"

namespace pfs {

enum class Task { classification, regression };

inline const char* to_string(Task t) {
  return t == Task::classification ? "classification" : "regression";
}

struct Dataset {
  std::vector<std::string> feature_names;
  std::string target_name = "b";
  Matrix a;                              // m x n
  std::vector<std::string> b_raw;        // target cells as read
  Vector b;                              // class ids (as reals) or regression targets
  std::vector<int> labels;               // classification only
  std::vector<std::string> class_names;  // classification only, indexed by id
  Task task = Task::regression;

  [[nodiscard]] Eigen::Index rows() const { return a.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return a.cols(); }

  void validate() const {
    if (static_cast<Eigen::Index>(feature_names.size()) != a.cols()) {
      throw data_error("dataset: feature name count does not match column count");
    }
    if (b.size() != a.rows() || static_cast<Eigen::Index>(b_raw.size()) != a.rows()) {
      throw data_error("dataset: target length does not match row count");
    }
    if (task == Task::classification && static_cast<Eigen::Index>(labels.size()) != a.rows()) {
      throw data_error("dataset: label count does not match row count");
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Splits one CSV record; double quotes may wrap a field and "" escapes a quote.
inline std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  out.emplace_back(trim(cell));
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

/// Encodes class strings to consecutive ids in order of first appearance.
inline void encode_classes(Dataset& d) {
  std::map<std::string, int> ids;
  d.class_names.clear();
  d.labels.assign(d.b_raw.size(), 0);
  d.b.resize(static_cast<Eigen::Index>(d.b_raw.size()));
  for (std::size_t i = 0; i < d.b_raw.size(); ++i) {
    // Numeric class cells are keyed by value so "1" and "1.0" coincide.
    std::string key = d.b_raw[i];
    if (const auto v = detail::parse_double(key)) key = detail::format_double(*v);
    auto [it, inserted] = ids.try_emplace(key, static_cast<int>(d.class_names.size()));
    if (inserted) d.class_names.push_back(d.b_raw[i]);
    d.labels[i] = it->second;
    d.b[static_cast<Eigen::Index>(i)] = it->second;
  }
  d.task = Task::classification;
}

/// Regression target thresholded at its median: "1" above, "0" otherwise.
[[nodiscard]] inline Dataset threshold_at_median(const Dataset& d) {
  std::vector<double> values(d.b.data(), d.b.data() + d.b.size());
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  const double median = m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  Dataset out = d;
  for (std::size_t i = 0; i < m; ++i) {
    out.b_raw[i] = d.b[static_cast<Eigen::Index>(i)] > median ? "1" : "0";
  }
  encode_classes(out);
  return out;
}

enum class TaskHint { automatic, classification, regression };

struct CsvOptions {
  bool has_header = true;
  /// Column name, or zero-based index as text. Empty selects the last column.
  std::string target;
  TaskHint task = TaskHint::automatic;
  /// Numeric targets with at most this many distinct values are treated as classes.
  std::size_t class_threshold = 10;
};

[[nodiscard]] inline Dataset parse_csv(std::istream& in, const CsvOptions& opts = {},
                                       const std::string& source = "<stream>") {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    records.push_back(detail::split_record(line));
    line_numbers.push_back(line_no);
  }
  if (records.empty()) throw data_error(source + ": empty file");

  const std::size_t width = records.front().size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw data_error(source + ":" + std::to_string(line_numbers[r]) + ": expected " +
                       std::to_string(width) + " fields, found " + std::to_string(records[r].size()));
    }
  }
  if (width < 2) throw data_error(source + ": need at least 2 columns");

  std::vector<std::string> header;
  std::size_t first = 0;
  if (opts.has_header) {
    header = records.front();
    first = 1;
  } else {
    for (std::size_t c = 0; c + 1 < width; ++c) header.push_back("f" + std::to_string(c + 1));
    header.push_back("b");
  }
  const std::size_t m = records.size() - first;
  if (m < 2) throw data_error(source + ": need at least 2 data rows");

  std::size_t target = width - 1;
  if (!opts.target.empty()) {
    const auto it = std::find(header.begin(), header.end(), opts.target);
    if (it != header.end()) {
      target = static_cast<std::size_t>(it - header.begin());
    } else if (const auto idx = detail::parse_double(opts.target);
               idx && *idx >= 0 && *idx < static_cast<double>(width) && *idx == std::floor(*idx)) {
      target = static_cast<std::size_t>(*idx);
    } else {
      throw data_error(source + ": target column '" + opts.target + "' not found");
    }
  }

  Dataset d;
  d.target_name = header[target];
  for (std::size_t c = 0; c < width; ++c) {
    if (c != target) d.feature_names.push_back(header[c]);
  }
  d.a.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(width - 1));
  d.b_raw.reserve(m);
  for (std::size_t r = 0; r < m; ++r) {
    const auto& rec = records[first + r];
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == target) {
        d.b_raw.push_back(rec[c]);
        continue;
      }
      const auto v = detail::parse_double(rec[c]);
      if (!v || !std::isfinite(*v)) {
        throw data_error(source + ":" + std::to_string(line_numbers[first + r]) + ": column " +
                         std::to_string(c + 1) + " ('" + header[c] + "'): non-numeric value '" +
                         rec[c] + "'");
      }
      d.a(static_cast<Eigen::Index>(r), col++) = *v;
    }
  }

  std::vector<double> numeric;
  bool all_numeric = true;
  for (const auto& cell : d.b_raw) {
    const auto v = detail::parse_double(cell);
    if (!v || !std::isfinite(*v)) {
      all_numeric = false;
      break;
    }
    numeric.push_back(*v);
  }
  bool classify = false;
  switch (opts.task) {
    case TaskHint::classification: classify = true; break;
    case TaskHint::regression:
      if (!all_numeric) throw data_error(source + ": regression target has non-numeric values");
      break;
    case TaskHint::automatic: {
      if (!all_numeric) {
        classify = true;
      } else {
        std::vector<double> distinct = numeric;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        classify = distinct.size() <= opts.class_threshold;
      }
      break;
    }
  }
  if (classify) {
    encode_classes(d);
  } else {
    d.task = Task::regression;
    d.b = Eigen::Map<const Vector>(numeric.data(), static_cast<Eigen::Index>(numeric.size()));
  }
  d.validate();
  return d;
}

[[nodiscard]] inline Dataset load_csv(const std::string& path, const CsvOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw data_error(path + ": cannot open file");
  return parse_csv(in, opts, path);
}

/// Header of feature names plus the target; values with 17 significant digits.
inline void write_csv(std::ostream& out, const Dataset& d) {
  for (const auto& name : d.feature_names) out << detail::quote_if_needed(name) << ',';
  out << detail::quote_if_needed(d.target_name) << '\n';
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.cols(); ++c) out << detail::format_double(d.a(r, c)) << ',';
    if (d.task == Task::classification) {
      out << detail::quote_if_needed(d.b_raw[static_cast<std::size_t>(r)]);
    } else {
      out << detail::format_double(d.b[r]);
    }
    out << '\n';
  }
}

inline void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw data_error(path + ": cannot open for writing");
  write_csv(out, d);
  out.flush();
  if (!out) throw data_error(path + ": write failed");
}

/// SynthData: f1..f4 uniform on [0, 1), f5 = 8 f3 + 2 f4, f6 = 5 f2,
/// b = 7 f1 - 3 f2 + 6 f3.
[[nodiscard]] inline Dataset synth_data(Eigen::Index m = 100, std::uint64_t seed = 0,
                                        Task task = Task::regression) {
  if (m < 2) throw contract_error("synth_data: m must be >= 2");
  Rng rng(seed);
  Dataset d;
  d.feature_names = {"f1", "f2", "f3", "f4", "f5", "f6"};
  d.target_name = "b";
  d.a.resize(m, 6);
  for (Eigen::Index j = 0; j < 4; ++j)
    for (Eigen::Index i = 0; i < m; ++i) d.a(i, j) = rng.uniform01();
  d.a.col(4) = 8.0 * d.a.col(2) + 2.0 * d.a.col(3);
  d.a.col(5) = 5.0 * d.a.col(1);
  d.b = 7.0 * d.a.col(0) - 3.0 * d.a.col(1) + 6.0 * d.a.col(2);
  d.task = Task::regression;
  d.b_raw.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) d.b_raw.push_back(detail::format_double(d.b[i]));
  return task == Task::classification ? threshold_at_median(d) : d;
}

/// Applies one seeded row permutation to A and the target. When `permutation`
/// is given it receives the source row of each output row.
[[nodiscard]] inline Dataset shuffle_rows(const Dataset& d, std::uint64_t seed,
                                          std::vector<Eigen::Index>* permutation = nullptr) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d.rows()));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Eigen::Index>(i);
  Rng rng(seed);
  shuffle_indices(perm, rng);

  Dataset out = d;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto src = perm[i];
    const auto dst = static_cast<Eigen::Index>(i);
    out.a.row(dst) = d.a.row(src);
    out.b[dst] = d.b[src];
    out.b_raw[i] = d.b_raw[static_cast<std::size_t>(src)];
    if (d.task == Task::classification) out.labels[i] = d.labels[static_cast<std::size_t>(src)];
  }
  if (permutation != nullptr) *permutation = std::move(perm);
  return out;
}

}  // namespace pfs
