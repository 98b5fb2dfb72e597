#pragma once

#include <stdexcept>
#include <string>

namespace hlsflow {

/// Precondition or input validation failure.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The time integrator could not continue (dt collapse, step budget, non-finite state).
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace hlsflow
