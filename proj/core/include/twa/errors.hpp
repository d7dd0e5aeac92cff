#pragma once

#include <stdexcept>
#include <string>

namespace twa {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dissipation matrix differs from its conjugate transpose.
class NonHermitianGamma : public Error {
 public:
  using Error::Error;
};

/// Dissipation matrix has an eigenvalue below the negative tolerance floor.
class NegativeGammaEigenvalue : public Error {
 public:
  using Error::Error;
};

/// An expression references a site or mode that the layout does not declare.
class UnknownVariable : public Error {
 public:
  using Error::Error;
};

/// Model or sampler parameters violate their invariants.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A trajectory produced NaN/Inf or a runaway component.
class NonFiniteState : public Error {
 public:
  NonFiniteState(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Too many trajectories of an ensemble aborted.
class EnsembleAborted : public Error {
 public:
  using Error::Error;
};

/// Coincident atom positions passed to the vacuum Green's tensor.
class ZeroDisplacement : public Error {
 public:
  using Error::Error;
};

/// Drive at or above the critical Rabi frequency of the large-spin estimate.
class AboveCritical : public Error {
 public:
  using Error::Error;
};

/// A classical monomial cannot be lifted to a unique operator ordering.
class OrderingAmbiguity : public Error {
 public:
  using Error::Error;
};

/// Dense density-matrix trace left its tolerance band.
class TraceDrift : public Error {
 public:
  using Error::Error;
};

}  // namespace twa
