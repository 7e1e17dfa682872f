#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "slitsim/error.hpp"
#include "slitsim/qstate.hpp"
#include "test_util.hpp"

using namespace slitsim;
using namespace slitsim::qstate;
using test::mat2;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("validate_density accepts the maximally mixed state") {
  const DensityMatrix rho = test::maximally_mixed(2);
  CHECK(rho.dim == 2);
  CHECK(rho.entries(0, 0).real() == doctest::Approx(0.5));
}

TEST_CASE("validate_density rejects an indefinite matrix naming the eigenvalue") {
  // eigenvalues 0.5 +- 0.6 by hand
  try {
    validate_density(mat2(0.5, 0.6, 0.6, 0.5));
    FAIL("expected NotPositive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositive);
    CHECK(e.detail() == doctest::Approx(-0.1).epsilon(1e-9));
  }
}

TEST_CASE("validate_density rejects a non-Hermitian matrix") {
  try {
    validate_density(mat2(1.0, Complex(0, 1), Complex(0, 1), 0.0));
    FAIL("expected NotHermitian");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotHermitian);
  }
}

TEST_CASE("validate_density rejects a wrong trace") {
  try {
    validate_density(mat2(0.7, 0.0, 0.0, 0.7));
    FAIL("expected TraceNotOne");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TraceNotOne);
    CHECK(e.detail() == doctest::Approx(0.4));
  }
}

TEST_CASE("Bloch poles and equator follow the slit convention") {
  const BlochVector pole1 = bloch_from_pure({1.0, 0.0});
  CHECK(pole1.theta == doctest::Approx(0.0));
  CHECK(pole1.phi == doctest::Approx(0.0));

  const double s = 1.0 / std::sqrt(2.0);
  const BlochVector eq = bloch_from_pure({Complex(s, 0), Complex(s, 0)});
  CHECK(eq.theta == doctest::Approx(kPi / 2));
  CHECK(eq.phi == doctest::Approx(0.0));

  const CVec pole2 = pure_from_bloch(BlochVector{kPi, 1.234});
  CHECK(std::abs(pole2[0]) == doctest::Approx(0.0));
  CHECK(pole2[1].real() == doctest::Approx(1.0));
  CHECK(pole2[1].imag() == doctest::Approx(0.0));
}

TEST_CASE("bloch_from_pure rejects unnormalized and wrong-dimension input") {
  CHECK_THROWS_AS(bloch_from_pure({1.0, 1.0}), Error);
  CHECK_THROWS_AS(bloch_from_pure({1.0, 0.0, 0.0}), Error);
}

TEST_CASE("Bloch round trip preserves 1000 random pure states") {
  for (int seed = 0; seed < 1000; ++seed) {
    const DensityMatrix rho = random_density(seed, 2, StateKind::Pure);
    const EigenSystem sys = hermitian_eigensystem(rho.entries);
    const CVec psi = sys.vectors[0];
    const CVec back = pure_from_bloch(bloch_from_pure(psi));
    CHECK(std::norm(inner(psi, back)) >= 1.0 - 1e-12);
  }
}

TEST_CASE("eigenbasis of the Paulis") {
  const EigenSystem z = eigenbasis(sigma_z());
  CHECK(z.values[0] == doctest::Approx(1.0));
  CHECK(z.values[1] == doctest::Approx(-1.0));
  CHECK(std::abs(z.vectors[0][0]) == doctest::Approx(1.0));
  CHECK(std::abs(z.vectors[1][1]) == doctest::Approx(1.0));

  const EigenSystem x = eigenbasis(sigma_x());
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(x.vectors[0][0].real() == doctest::Approx(s));
  CHECK(x.vectors[0][1].real() == doctest::Approx(s));
  CHECK(x.vectors[1][0].real() == doctest::Approx(s));
  CHECK(x.vectors[1][1].real() == doctest::Approx(-s));
  CHECK_FALSE(x.degenerate);
}

TEST_CASE("eigenbasis flags a degenerate observable") {
  CHECK(eigenbasis(make_observable(CMat::identity(2))).degenerate);
}

TEST_CASE("eigenbasis residuals and reconstruction on random Hermitian matrices") {
  for (int seed = 0; seed < 200; ++seed) {
    const int dim = 2 + seed % 7;  // up to 8
    const Observable obs = random_observable(seed, dim);
    const EigenSystem sys = eigenbasis(obs);

    // residual oracle ||H v - lambda v||
    for (int k = 0; k < dim; ++k) {
      const CVec hv = mat_vec(obs.entries, sys.vectors[k]);
      double res = 0.0;
      for (int i = 0; i < dim; ++i) res += std::norm(hv[i] - sys.values[k] * sys.vectors[k][i]);
      CHECK(std::sqrt(res) <= 1e-10 * std::max(1.0, std::abs(sys.values[k])));
    }
    // orthonormality
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        const Complex ov = inner(sys.vectors[a], sys.vectors[b]);
        CHECK(std::abs(ov - (a == b ? 1.0 : 0.0)) <= 1e-10);
      }
    }
    // spectral reconstruction
    CMat sum(dim);
    for (int k = 0; k < dim; ++k) {
      sum = sum + outer(sys.vectors[k], sys.vectors[k]).scaled(sys.values[k]);
    }
    CHECK((sum - obs.entries).frobenius_norm() <= 1e-10 * std::max(1.0, obs.entries.frobenius_norm()));
    // descending order
    for (int k = 0; k + 1 < dim; ++k) CHECK(sys.values[k] >= sys.values[k + 1] - 1e-12);
  }
}

TEST_CASE("trace distance basics") {
  const DensityMatrix rho = random_density(5, 2, StateKind::Mixed);
  CHECK(trace_distance(rho, rho) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(trace_distance(test::slit_state(2, 1), test::slit_state(2, 2)) == doctest::Approx(1.0));
  CHECK(trace_distance(test::slit_state(2, 1), test::maximally_mixed(2)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(trace_distance(test::maximally_mixed(2), test::maximally_mixed(3)), Error);
}

TEST_CASE("trace distance obeys the triangle inequality on random triples") {
  for (int seed = 0; seed < 100; ++seed) {
    const int dim = 2 + seed % 3;
    const DensityMatrix a = random_density(3 * seed, dim, StateKind::Mixed);
    const DensityMatrix b = random_density(3 * seed + 1, dim, StateKind::Mixed);
    const DensityMatrix c = random_density(3 * seed + 2, dim, StateKind::Pure);
    CHECK(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-10);
  }
}

TEST_CASE("random_density is deterministic, pure states have unit purity") {
  const DensityMatrix a = random_density(42, 3, StateKind::Mixed);
  const DensityMatrix b = random_density(42, 3, StateKind::Mixed);
  CHECK((a.entries - b.entries).max_abs() == 0.0);

  for (int seed = 0; seed < 50; ++seed) {
    const DensityMatrix p = random_density(seed, 2, StateKind::Pure);
    const double purity = (p.entries * p.entries).trace().real();
    CHECK(purity == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mixed draws are full rank, every draw validates") {
  for (int seed = 0; seed < 1000; ++seed) {
    const DensityMatrix mixed = random_density(seed, 2, StateKind::Mixed);
    const EigenSystem sys = hermitian_eigensystem(mixed.entries);
    CHECK(sys.values[1] > 0.0);
  }
  // both kinds validate across dimensions (validate_density runs inside
  // random_density for mixed; run pure through it explicitly)
  for (int seed = 0; seed < 1000; ++seed) {
    const int dim = 2 + seed % 4;
    CHECK_NOTHROW(validate_density(random_density(seed, dim, StateKind::Pure).entries));
    CHECK_NOTHROW(validate_density(random_density(seed, dim, StateKind::Mixed).entries));
  }
}
