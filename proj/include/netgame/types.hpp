#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace netgame {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Mismatched vector/matrix shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called on inputs that violate its stated precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Operation not defined for the given proximal-map kind.
class UnsupportedKindError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative solver hit its iteration cap; carries the last iterate and
/// the residual at that point so callers can inspect or restart.
class IterationLimitError : public std::runtime_error {
 public:
  IterationLimitError(const std::string& what, Vec last_iterate, double residual)
      : std::runtime_error(what),
        last_iterate(std::move(last_iterate)),
        residual(residual) {}

  Vec last_iterate;
  double residual;
};

}  // namespace netgame
