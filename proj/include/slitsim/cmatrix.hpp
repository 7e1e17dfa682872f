#pragma once

#include <complex>
#include <vector>

namespace slitsim {

// Dense complex vectors and square matrices for small dimensions (D <= 8).
// Everything is by-value and row-major; no external solver is involved.

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

class CMat {
 public:
  CMat() = default;
  explicit CMat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n) {}

  static CMat identity(int n) {
    CMat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int dim() const { return n_; }

  Complex& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const Complex& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  CMat adjoint() const;
  Complex trace() const;
  CMat operator*(const CMat& rhs) const;
  CMat operator+(const CMat& rhs) const;
  CMat operator-(const CMat& rhs) const;
  CMat scaled(Complex s) const;

  /// Largest entry modulus.
  double max_abs() const;
  double frobenius_norm() const;
  /// max_ij |a_ij - conj(a_ji)|.
  double hermiticity_defect() const;

 private:
  int n_ = 0;
  std::vector<Complex> a_;
};

/// <a|b> with the left argument conjugated.
Complex inner(const CVec& a, const CVec& b);
double norm2(const CVec& v);
CVec normalized(const CVec& v);
/// |a><b|.
CMat outer(const CVec& a, const CVec& b);
CVec mat_vec(const CMat& m, const CVec& v);
/// <v|M|v>.
Complex expectation(const CMat& m, const CVec& v);

/// Multiplies by a global phase so the first component with modulus above
/// 1e-12 becomes real non-negative. No-op on the zero vector.
void gauge_fix(CVec& v);

struct EigenSystem {
  std::vector<double> values;      // descending
  std::vector<CVec> vectors;       // orthonormal, gauge-fixed
  bool degenerate = false;         // repeated eigenvalue detected (warning, not error)
};

/// Eigendecomposition of a Hermitian matrix: closed form at n=2, cyclic
/// Jacobi sweeps otherwise, run until the off-diagonal Frobenius norm falls
/// below `offdiag_tol` (absolute, relative to the matrix scale).
/// Ties in the ordering are broken by descending component moduli, lowest
/// index first.
EigenSystem hermitian_eigensystem(const CMat& h, double offdiag_tol = 1e-13);

}  // namespace slitsim
