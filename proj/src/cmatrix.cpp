#include "slitsim/cmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slitsim/error.hpp"

namespace slitsim {

namespace {

void require_same_dim(const CMat& a, const CMat& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix dimensions differ: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
}

}  // namespace

CMat CMat::adjoint() const {
  CMat r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r(i, j) = std::conj((*this)(j, i));
  return r;
}

Complex CMat::trace() const {
  Complex t = 0.0;
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

CMat CMat::operator*(const CMat& rhs) const {
  require_same_dim(*this, rhs);
  CMat r(n_);
  for (int i = 0; i < n_; ++i) {
    for (int k = 0; k < n_; ++k) {
      const Complex aik = (*this)(i, k);
      if (aik == Complex{}) continue;
      for (int j = 0; j < n_; ++j) r(i, j) += aik * rhs(k, j);
    }
  }
  return r;
}

CMat CMat::operator+(const CMat& rhs) const {
  require_same_dim(*this, rhs);
  CMat r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r(i, j) = (*this)(i, j) + rhs(i, j);
  return r;
}

CMat CMat::operator-(const CMat& rhs) const {
  require_same_dim(*this, rhs);
  CMat r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r(i, j) = (*this)(i, j) - rhs(i, j);
  return r;
}

CMat CMat::scaled(Complex s) const {
  CMat r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r(i, j) = (*this)(i, j) * s;
  return r;
}

double CMat::max_abs() const {
  double m = 0.0;
  for (const Complex& c : a_) m = std::max(m, std::abs(c));
  return m;
}

double CMat::frobenius_norm() const {
  double s = 0.0;
  for (const Complex& c : a_) s += std::norm(c);
  return std::sqrt(s);
}

double CMat::hermiticity_defect() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return worst;
}

Complex inner(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "vector lengths differ");
  }
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(const CVec& v) {
  double s = 0.0;
  for (const Complex& c : v) s += std::norm(c);
  return s;
}

CVec normalized(const CVec& v) {
  const double n = std::sqrt(norm2(v));
  CVec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] / n;
  return r;
}

CMat outer(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "vector lengths differ");
  }
  const int n = static_cast<int>(a.size());
  CMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = a[i] * std::conj(b[j]);
  return r;
}

CVec mat_vec(const CMat& m, const CVec& v) {
  if (m.dim() != static_cast<int>(v.size())) {
    throw Error(ErrorCode::DimensionMismatch, "matrix/vector dimensions differ");
  }
  CVec r(v.size());
  for (int i = 0; i < m.dim(); ++i) {
    Complex s = 0.0;
    for (int j = 0; j < m.dim(); ++j) s += m(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

Complex expectation(const CMat& m, const CVec& v) { return inner(v, mat_vec(m, v)); }

void gauge_fix(CVec& v) {
  for (Complex& c : v) {
    const double mod = std::abs(c);
    if (mod > 1e-12) {
      const Complex phase = std::conj(c) / mod;
      for (Complex& x : v) x *= phase;
      c = Complex(mod, 0.0);  // kill the rounding residue in the anchor
      return;
    }
  }
}

namespace {

// Applies the plane rotation zeroing h(p,q): H <- J^dag H J, V <- V J, with
// J the identity outside the (p,q) block and
//   J(p,p)=c, J(p,q)=-s*e^{i beta}, J(q,p)=s*e^{-i beta}, J(q,q)=c,
// where beta = arg(h_pq) and tan(2t) = 2|h_pq| / (h_pp - h_qq).
void jacobi_rotate(CMat& h, std::vector<CVec>& v, int p, int q) {
  const Complex hpq = h(p, q);
  const double mod = std::abs(hpq);
  if (mod == 0.0) return;
  const Complex eib = hpq / mod;  // e^{i beta}
  const double app = h(p, p).real();
  const double aqq = h(q, q).real();
  const double t = 0.5 * std::atan2(2.0 * mod, app - aqq);
  const double c = std::cos(t);
  const double s = std::sin(t);

  const int n = h.dim();
  // columns: col_p' = c*col_p + s*e^{-i beta}*col_q ; col_q' = -s*e^{i beta}*col_p + c*col_q
  for (int i = 0; i < n; ++i) {
    const Complex hip = h(i, p);
    const Complex hiq = h(i, q);
    h(i, p) = c * hip + s * std::conj(eib) * hiq;
    h(i, q) = -s * eib * hip + c * hiq;
  }
  // rows (J^dag from the left)
  for (int j = 0; j < n; ++j) {
    const Complex hpj = h(p, j);
    const Complex hqj = h(q, j);
    h(p, j) = c * hpj + s * eib * hqj;
    h(q, j) = -s * std::conj(eib) * hpj + c * hqj;
  }
  h(p, q) = 0.0;
  h(q, p) = 0.0;
  h(p, p) = Complex(h(p, p).real(), 0.0);
  h(q, q) = Complex(h(q, q).real(), 0.0);
  // accumulated eigenvector columns
  for (int i = 0; i < n; ++i) {
    const Complex vip = v[p][i];
    const Complex viq = v[q][i];
    v[p][i] = c * vip + s * std::conj(eib) * viq;
    v[q][i] = -s * eib * vip + c * viq;
  }
}

double offdiag_norm(const CMat& h) {
  double s = 0.0;
  for (int i = 0; i < h.dim(); ++i)
    for (int j = 0; j < h.dim(); ++j)
      if (i != j) s += std::norm(h(i, j));
  return std::sqrt(s);
}

// Descending lexicographic comparison on component moduli, used to order
// eigenvectors of a repeated eigenvalue reproducibly.
bool modulus_greater(const CVec& a, const CVec& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double ma = std::abs(a[k]);
    const double mb = std::abs(b[k]);
    if (std::abs(ma - mb) > 1e-10) return ma > mb;
  }
  return false;
}

}  // namespace

EigenSystem hermitian_eigensystem(const CMat& h, double offdiag_tol) {
  const int n = h.dim();
  if (n < 1) throw Error(ErrorCode::WrongDimension, "empty matrix");

  EigenSystem sys;
  std::vector<CVec> vecs;
  std::vector<double> vals(n);

  if (n == 2) {
    const double a = h(0, 0).real();
    const double d = h(1, 1).real();
    const Complex b = h(0, 1);
    const double mod = std::abs(b);
    const double mean = 0.5 * (a + d);
    const double r = std::hypot(0.5 * (a - d), mod);
    vals = {mean + r, mean - r};
    if (mod < 1e-300) {
      vecs = {{1.0, 0.0}, {0.0, 1.0}};
      if (a < d) std::swap(vecs[0], vecs[1]);
    } else {
      const Complex eib = b / mod;
      const double t = 0.5 * std::atan2(2.0 * mod, a - d);
      const double c = std::cos(t);
      const double s = std::sin(t);
      vecs = {{c, std::conj(eib) * s}, {-eib * s, Complex(c, 0.0)}};
    }
  } else {
    CMat w = h;
    vecs.assign(n, CVec(n));
    for (int i = 0; i < n; ++i) vecs[i][i] = 1.0;
    const double scale = std::max(1.0, w.frobenius_norm());
    for (int sweep = 0; sweep < 100; ++sweep) {
      if (offdiag_norm(w) <= offdiag_tol * scale) break;
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) jacobi_rotate(w, vecs, p, q);
    }
    for (int i = 0; i < n; ++i) vals[i] = w(i, i).real();
  }

  // sort eigenpairs by descending eigenvalue, tolerance-aware tie-break
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  double scale = 1.0;
  for (double v : vals) scale = std::max(scale, std::abs(v));
  const double tie_tol = 1e-10 * scale;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (std::abs(vals[i] - vals[j]) > tie_tol) return vals[i] > vals[j];
    return modulus_greater(vecs[i], vecs[j]);
  });

  sys.values.resize(n);
  sys.vectors.resize(n);
  for (int k = 0; k < n; ++k) {
    sys.values[k] = vals[order[k]];
    sys.vectors[k] = vecs[order[k]];
    gauge_fix(sys.vectors[k]);
  }
  for (int k = 0; k + 1 < n; ++k) {
    if (std::abs(sys.values[k] - sys.values[k + 1]) <= tie_tol) sys.degenerate = true;
  }
  return sys;
}

}  // namespace slitsim
