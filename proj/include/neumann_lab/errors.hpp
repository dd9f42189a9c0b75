#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace nlab {

// Shortest general form with six significant digits, for messages.
inline std::string format_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// Invalid input to a mathematical operation (negative time, support outside
// the operator's vertex set, divergent neighbour sums).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration or precondition on numerical parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rejected graph, exhaustion or operator construction.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed graph file or expression.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A weight or measure leaves the representable double range.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// A property the theory guarantees failed numerically (monotonicity,
// domination, proof bounds).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A truncation-based reference failed to stabilise within the provided
// exhaustion. Carries the last observed increment.
class TruncationInsufficient : public std::runtime_error {
 public:
  TruncationInsufficient(const std::string& what, double last_increment)
      : std::runtime_error(what), last_increment_(last_increment) {}

  double last_increment() const noexcept { return last_increment_; }

 private:
  double last_increment_;
};

}  // namespace nlab
