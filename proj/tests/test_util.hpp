#pragma once

#include <cmath>
#include <complex>

#include "slitsim/cmatrix.hpp"
#include "slitsim/qstate.hpp"

namespace slitsim::test {

inline CMat mat2(Complex a, Complex b, Complex c, Complex d) {
  CMat m(2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

inline qstate::DensityMatrix maximally_mixed(int dim) {
  CMat m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0 / dim;
  return qstate::validate_density(m);
}

inline qstate::DensityMatrix plus_state() {
  return qstate::pure_state_density({Complex(1.0 / std::sqrt(2.0), 0.0),
                                     Complex(1.0 / std::sqrt(2.0), 0.0)});
}

inline qstate::DensityMatrix minus_state() {
  return qstate::pure_state_density({Complex(1.0 / std::sqrt(2.0), 0.0),
                                     Complex(-1.0 / std::sqrt(2.0), 0.0)});
}

inline qstate::DensityMatrix slit_state(int dim, int slit) {
  CVec v(dim, Complex{});
  v[slit - 1] = 1.0;
  return qstate::pure_state_density(v);
}

}  // namespace slitsim::test
