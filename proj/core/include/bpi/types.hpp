#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bpi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Malformed input: bad dimensions, violated preconditions, unparseable files.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration or fixture files that parse but violate an invariant.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// A computation that cannot produce a meaningful result (singular systems,
// non-finite values, unidentifiable sources).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidInput(what);
}

}  // namespace bpi
