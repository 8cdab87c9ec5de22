#pragma once

#include <stdexcept>
#include <string>

namespace rcwbc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model loading.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line + 1) + ")" : what), line_(line) {}
  /// Zero-based line in the source document, or -1 when unknown.
  int line() const { return line_; }

 private:
  int line_;
};
class ValidationError : public Error {
 public:
  using Error::Error;
};
class TopologyError : public Error {
 public:
  using Error::Error;
};

// Kinematics / dynamics.
class NonUnitQuaternion : public Error {
 public:
  using Error::Error;
};
class UnknownFrame : public Error {
 public:
  using Error::Error;
};
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class NonPositiveDefinite : public Error {
 public:
  using Error::Error;
};
class SingularInertia : public Error {
 public:
  using Error::Error;
};

// Optimization.
class IllConditioned : public Error {
 public:
  using Error::Error;
};
class SolverInfeasible : public Error {
 public:
  SolverInfeasible(const std::string& what, std::string block)
      : Error(what), block_(std::move(block)) {}
  /// Name of the constraint block that could not be satisfied.
  const std::string& block() const { return block_; }

 private:
  std::string block_;
};
class MissingContactFrame : public Error {
 public:
  using Error::Error;
};

class IkDidNotConverge : public Error {
 public:
  IkDidNotConverge(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class SingularKkt : public Error {
 public:
  using Error::Error;
};

}  // namespace rcwbc
