#pragma once

#include <stdexcept>

namespace repure {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A value failed one of its structural invariants (non-finite entries,
/// broken hermiticity, negative weight, ...).
struct InvariantViolation : Error {
  using Error::Error;
};

/// The map has a repeated eigenvalue with a one-dimensional eigenspace,
/// so no biorthogonal eigenbasis exists.
struct DefectiveMap : Error {
  using Error::Error;
};

/// Both eigenvalues have the same modulus: the map selects no dominant
/// eigenstate and repeated application extracts nothing.
struct NonExtractive : Error {
  using Error::Error;
};

/// The map is numerically zero.
struct NullMap : Error {
  using Error::Error;
};

/// The conditional evolution has vanishing success probability.
struct StateAnnihilated : Error {
  using Error::Error;
};

/// The closed-form purity denominator vanished.
struct DegenerateDenominator : Error {
  using Error::Error;
};

/// A step index outside the domain of the requested formula.
struct InvalidK : Error {
  using Error::Error;
};

/// No finite measurement count satisfies the requested bound.
struct UndefinedThreshold : Error {
  using Error::Error;
};

/// |cos(eps*tau)| sits at an endpoint where the threshold formula degenerates.
struct DegenerateTau : Error {
  using Error::Error;
};

/// Invalid run configuration (CLI flags or config file).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace repure
