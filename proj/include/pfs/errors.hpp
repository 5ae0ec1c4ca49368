#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pfs {

/// Precondition of a public operation was not met (bad shape, zero vector, k out of range).
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The SVD routine failed or produced non-finite factors.
class decomposition_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input is well-formed but numerically unusable (e.g. rank below 2, zero sigma_min).
class degenerate_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable dataset.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-fatal conditions are appended here by operations that accept a sink.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace pfs
