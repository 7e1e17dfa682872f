#pragma once

#include <cstdint>

#include "slitsim/cmatrix.hpp"

namespace slitsim::qstate {

/// D x D density matrix, validated: Hermitian to 1e-12, unit trace to
/// 1e-12, positive semidefinite to -1e-10 on the smallest eigenvalue.
struct DensityMatrix {
  int dim = 0;
  CMat entries;
};

/// Hermitian observable in arbitrary units.
struct Observable {
  int dim = 0;
  CMat entries;
};

/// Pure-qubit direction: theta in [0, pi], phi in [0, 2*pi).
/// Pole convention: slit state 1 at theta=0, slit state 2 at theta=pi.
struct BlochVector {
  double theta = 0.0;
  double phi = 0.0;
};

/// Checks the density-matrix invariants and returns the value, or throws
/// NotHermitian / TraceNotOne / NotPositive naming the worst offender.
/// Never repairs the input.
DensityMatrix validate_density(const CMat& entries);

/// Hermiticity-checked observable (1e-12 tolerance).
Observable make_observable(const CMat& entries);

BlochVector bloch_from_pure(const CVec& state);
CVec pure_from_bloch(const BlochVector& b);

/// Eigenvalues descending, eigenvectors orthonormal and gauge-fixed;
/// `degenerate` is a warning, the basis is still usable.
EigenSystem eigenbasis(const Observable& obs);

/// (1/2) sum |eigenvalues of rho - sigma|.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

enum class StateKind { Pure, Mixed };

/// Deterministic in `seed`. Pure states are normalized complex-Gaussian
/// vectors; mixed states are normalized G G^dag with G square complex
/// Gaussian (full rank almost surely).
DensityMatrix random_density(std::uint64_t seed, int dim, StateKind kind);

/// Deterministic random Hermitian matrix, (G + G^dag)/2 scaled to O(1).
Observable random_observable(std::uint64_t seed, int dim);

Observable sigma_x();
Observable sigma_y();
Observable sigma_z();

/// |psi><psi| for a normalized vector.
DensityMatrix pure_state_density(const CVec& psi);

}  // namespace slitsim::qstate
