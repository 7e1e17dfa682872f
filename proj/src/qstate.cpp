#include "slitsim/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slitsim/error.hpp"
#include "slitsim/rng.hpp"

namespace slitsim::qstate {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double wrap_2pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

}  // namespace

DensityMatrix validate_density(const CMat& entries) {
  const int n = entries.dim();
  if (n < 2) throw Error(ErrorCode::WrongDimension, "density matrix needs dim >= 2");

  const double herm = entries.hermiticity_defect();
  if (herm > 1e-12) {
    throw Error(ErrorCode::NotHermitian,
                "worst |rho_ij - conj(rho_ji)| = " + std::to_string(herm), herm);
  }
  const double tr_err = std::abs(entries.trace() - Complex(1.0, 0.0));
  if (tr_err > 1e-12) {
    throw Error(ErrorCode::TraceNotOne, "|Tr(rho) - 1| = " + std::to_string(tr_err), tr_err);
  }
  const EigenSystem sys = hermitian_eigensystem(entries);
  const double min_eig = *std::min_element(sys.values.begin(), sys.values.end());
  if (min_eig < -1e-10) {
    throw Error(ErrorCode::NotPositive, "min eigenvalue = " + std::to_string(min_eig), min_eig);
  }
  return DensityMatrix{n, entries};
}

Observable make_observable(const CMat& entries) {
  const int n = entries.dim();
  if (n < 2) throw Error(ErrorCode::WrongDimension, "observable needs dim >= 2");
  const double herm = entries.hermiticity_defect();
  if (herm > 1e-12) {
    throw Error(ErrorCode::NotHermitian,
                "worst |o_ij - conj(o_ji)| = " + std::to_string(herm), herm);
  }
  return Observable{n, entries};
}

BlochVector bloch_from_pure(const CVec& state) {
  if (state.size() != 2) {
    throw Error(ErrorCode::WrongDimension, "Bloch map needs a 2-component state");
  }
  const double n2 = norm2(state);
  if (std::abs(n2 - 1.0) > 1e-12) {
    throw Error(ErrorCode::NotNormalized, "|norm^2 - 1| = " + std::to_string(std::abs(n2 - 1.0)),
                std::abs(n2 - 1.0));
  }
  CVec v = state;
  gauge_fix(v);
  const double m0 = std::abs(v[0]);
  const double m1 = std::abs(v[1]);
  const double theta = 2.0 * std::atan2(m1, m0);
  const double phi = (m1 > 1e-12 && m0 > 1e-12) ? wrap_2pi(std::arg(v[1])) : 0.0;
  return BlochVector{theta, phi};
}

CVec pure_from_bloch(const BlochVector& b) {
  if (b.theta < -1e-12 || b.theta > 3.14159265358979323846 + 1e-12) {
    throw Error(ErrorCode::OutOfRange, "theta outside [0, pi]");
  }
  CVec v = {Complex(std::cos(0.5 * b.theta), 0.0),
            std::polar(std::sin(0.5 * b.theta), b.phi)};
  gauge_fix(v);
  return v;
}

EigenSystem eigenbasis(const Observable& obs) { return hermitian_eigensystem(obs.entries); }

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim != sigma.dim) {
    throw Error(ErrorCode::DimensionMismatch, "density matrices of unequal dimension");
  }
  const EigenSystem sys = hermitian_eigensystem(rho.entries - sigma.entries);
  double s = 0.0;
  for (double v : sys.values) s += std::abs(v);
  return 0.5 * s;
}

DensityMatrix random_density(std::uint64_t seed, int dim, StateKind kind) {
  if (dim < 2) throw Error(ErrorCode::WrongDimension, "dim >= 2 required");
  Rng rng(substream_seed(seed, 0xD15C0));

  if (kind == StateKind::Pure) {
    CVec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = Complex(rng.normal(), rng.normal());
    v = normalized(v);
    gauge_fix(v);
    return pure_state_density(v);
  }

  CMat g(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  const CMat m = g * g.adjoint();
  const double tr = m.trace().real();
  // fill the upper triangle and mirror so the result is Hermitian exactly
  CMat rho(dim);
  for (int i = 0; i < dim; ++i) {
    rho(i, i) = Complex(m(i, i).real() / tr, 0.0);
    for (int j = i + 1; j < dim; ++j) {
      const Complex v = 0.5 * (m(i, j) + std::conj(m(j, i))) / tr;
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
  }
  return validate_density(rho);
}

Observable random_observable(std::uint64_t seed, int dim) {
  if (dim < 2) throw Error(ErrorCode::WrongDimension, "dim >= 2 required");
  Rng rng(substream_seed(seed, 0x0B5));
  CMat g(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  CMat h(dim);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = Complex(g(i, i).real(), 0.0);
    for (int j = i + 1; j < dim; ++j) {
      const Complex v = 0.5 * (g(i, j) + std::conj(g(j, i)));
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  return Observable{dim, h};
}

Observable sigma_x() {
  CMat m(2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return Observable{2, m};
}

Observable sigma_y() {
  CMat m(2);
  m(0, 1) = Complex(0.0, -1.0);
  m(1, 0) = Complex(0.0, 1.0);
  return Observable{2, m};
}

Observable sigma_z() {
  CMat m(2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return Observable{2, m};
}

DensityMatrix pure_state_density(const CVec& psi) {
  const double n2 = norm2(psi);
  if (std::abs(n2 - 1.0) > 1e-12) {
    throw Error(ErrorCode::NotNormalized, "pure state not normalized", std::abs(n2 - 1.0));
  }
  return DensityMatrix{static_cast<int>(psi.size()), outer(psi, psi)};
}

}  // namespace slitsim::qstate
