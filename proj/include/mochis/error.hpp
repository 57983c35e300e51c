#pragma once

#include <stdexcept>
#include <string>

namespace mochis {

// Bad user input: malformed spec, out-of-range parameters, unreadable samples.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A request exceeds a configured size cap (e.g. oracle pmf on a huge D_{n,k}).
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// An internal invariant failed, e.g. a moment sequence that is not
// completely monotone. Always signals a bug upstream of the caller.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mochis
