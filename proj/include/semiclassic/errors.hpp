#pragma once

#include <stdexcept>
#include <string>

namespace semiclassic {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// bad user-supplied numbers: nonpositive epsilon, non power-of-two N, ...
class ParameterError : public Error {
 public:
  using Error::Error;
};

// the grid cannot resolve the requested object
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double distance)
      : Error(what), distance_(distance) {}
  double distance() const noexcept { return distance_; }

 private:
  double distance_;
};

class BoundaryEscapeError : public Error {
 public:
  BoundaryEscapeError(const std::string& what, double edge_mass)
      : Error(what), edge_mass_(edge_mass) {}
  double edge_mass() const noexcept { return edge_mass_; }

 private:
  double edge_mass_;
};

// an invariant that should hold by construction did not
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class AuditError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace semiclassic
