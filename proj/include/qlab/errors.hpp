#pragma once

#include <stdexcept>
#include <string>

namespace qlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Q = 1 tuples have no pairwise sheet distance.
struct UndefinedSeparation : Error {
  using Error::Error;
};

struct ResolutionError : Error {
  using Error::Error;
};

struct RadiusError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

struct RefineMeshError : Error {
  RefineMeshError(const std::string& msg, int a, int b, double osc)
      : Error(msg), edge_a(a), edge_b(b), oscillation(osc) {}
  int edge_a = -1;
  int edge_b = -1;
  double oscillation = 0.0;
};

struct ConfigError : Error {
  using Error::Error;
};

struct NotConvergedError : Error {
  using Error::Error;
};

struct ExperimentInvariantViolation : Error {
  using Error::Error;
};

}  // namespace qlab
