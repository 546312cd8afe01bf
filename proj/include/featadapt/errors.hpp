#pragma once

#include <stdexcept>
#include <string>

namespace featadapt {

// Bad arguments: dimension mismatch, out-of-range parameters, asymmetric input.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative routine failed to converge or hit a numerically impossible state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An equality-constrained program has no feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A combinatorial enumeration would exceed its configured cap.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace featadapt
