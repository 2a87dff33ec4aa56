#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mgs {

/// Samples are stored as rows throughout the library.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Precondition or shape violation by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values, divergence, failed numerical checks.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing files, bad magic bytes, truncated streams.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace mgs
