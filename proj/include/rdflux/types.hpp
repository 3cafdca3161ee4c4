// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace rdflux {

/// Largest supported spatial dimension. Small vectors and matrices are
/// stack-allocated up to this size (plus one for barycentric tuples).
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim + 1,
                          kMaxDim + 1>;
using Point = Vec;

/// Scalar field evaluated at a physical point.
using ScalarField = std::function<double(const Point&)>;

// ---------------------------------------------------------------------------
// Errors. Every failure mode the library reports is a distinct type so that
// callers (and the CLI exit-code mapping) can react precisely.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSimplex : public Error {
 public:
  using Error::Error;
};

class NonConformingMesh : public Error {
 public:
  using Error::Error;
};

class MeshFormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDegree : public Error {
 public:
  using Error::Error;
};

class UnsolvableProblem : public Error {
 public:
  using Error::Error;
};

class NotSpd : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class InfeasibleConstraints : public Error {
 public:
  using Error::Error;
};

class DivergenceAuditFailed : public Error {
 public:
  using Error::Error;
};

class ConformityAuditFailed : public Error {
 public:
  using Error::Error;
};

class InvalidVariant : public Error {
 public:
  using Error::Error;
};

class NegativeDifference : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Thrown for invalid user configuration (bad CLI values, odd M, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rdflux
