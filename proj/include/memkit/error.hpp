#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace memkit {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed netlist or expression text. Line and column are 1-based; line 0
// means the error is not tied to a single line.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(format(message, line, column)), message_(message), line_(line), column_(column) {}

  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& message, int line, int column) {
    if (line <= 0) return message;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
  }

  std::string message_;
  int line_;
  int column_;
};

// Structural problem in a circuit: disconnected graph, self loop, unknown node.
class CircuitError : public Error {
 public:
  using Error::Error;
};

// Division by zero or a non-finite value while evaluating a characteristic.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The analysis cannot proceed on this circuit (ill-posed topology, index two
// initialization). Carries the names of the branches that witness the problem.
class AnalysisRefusal : public Error {
 public:
  AnalysisRefusal(const std::string& message, std::vector<std::string> witness)
      : Error(message), witness_(std::move(witness)) {}
  const std::vector<std::string>& witness() const { return witness_; }

 private:
  std::vector<std::string> witness_;
};

// A hypothesis of a structural reduction does not hold (e.g. a singular
// capacitance where its inverse is needed).
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class NewtonError : public Error {
 public:
  NewtonError(const std::string& message, bool singular, int iterations, double residual_norm)
      : Error(message), singular_(singular), iterations_(iterations), residual_norm_(residual_norm) {}

  bool singular_jacobian() const { return singular_; }
  int iterations() const { return iterations_; }
  double residual_norm() const { return residual_norm_; }

 private:
  bool singular_;
  int iterations_;
  double residual_norm_;
};

// det(lambda E - F) vanishes identically; no index is defined.
class SingularPencil : public Error {
 public:
  using Error::Error;
};

}  // namespace memkit
