#pragma once

#include <stdexcept>
#include <string>

namespace kyp {

/// Base class for every failure raised by the solver stack.
class KypError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public KypError {
 public:
  using KypError::KypError;
};

/// The multiplier value lies outside the Riccati solvability domain: R(λ) is
/// not negative definite or the Hamiltonian has spectrum on the imaginary axis.
class NotInDomain : public KypError {
 public:
  using KypError::KypError;
};

/// The basis X1 of the selected invariant subspace is too ill-conditioned to
/// invert, or the recovered Riccati solution misses its residual tolerance.
class IllConditioned : public KypError {
 public:
  using KypError::KypError;
};

/// A Lyapunov operator M'X + XM is singular (eigenvalues mirrored across the
/// imaginary axis).
class SingularPencil : public KypError {
 public:
  using KypError::KypError;
};

/// The gap matrix recovered from the Lyapunov route is numerically singular.
class NearSingularY : public KypError {
 public:
  using KypError::KypError;
};

/// A barrier argument is not positive definite at the requested point.
class OutOfDomain : public KypError {
 public:
  using KypError::KypError;
};

class LineSearchFailed : public KypError {
 public:
  using KypError::KypError;
};

class NoFeasiblePoint : public KypError {
 public:
  using KypError::KypError;
};

}  // namespace kyp
