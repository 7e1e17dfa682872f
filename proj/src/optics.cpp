#include "slitsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "slitsim/error.hpp"

namespace slitsim::optics {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_density_dim(const DensityMatrix& rho, const OpticalGeometry& geom) {
  if (rho.dim != geom.slit_count) {
    throw Error(ErrorCode::DimensionMismatch,
                "state dimension " + std::to_string(rho.dim) + " != slit count " +
                    std::to_string(geom.slit_count));
  }
}

}  // namespace

void validate_geometry(const OpticalGeometry& geom) {
  if (geom.slit_count < 2) {
    throw Error(ErrorCode::ValidationError, "slit count must be >= 2");
  }
  if (geom.slit_half_width <= 0.0 || geom.slit_separation <= 0.0 || geom.wavelength <= 0.0 ||
      geom.focal_length <= 0.0) {
    throw Error(ErrorCode::ValidationError, "geometry lengths must be positive");
  }
  if (geom.slit_separation <= 2.0 * geom.slit_half_width) {
    throw Error(ErrorCode::ValidationError,
                "slit overlap: separation d must exceed the full slit width 2a");
  }
  if (geom.wavelength / geom.focal_length >= 1e-3) {
    throw Error(ErrorCode::ValidationError, "non-paraxial geometry: lambda/f must be < 1e-3");
  }
}

PlaneParams plane_params(const OpticalGeometry& geom, double z) {
  validate_geometry(geom);
  const double f = geom.focal_length;
  if (z == 2.0 * f) {
    throw Error(ErrorCode::ImagePlaneSingular,
                "kappa diverges at z = 2f; use the image-plane projector");
  }
  if (z < f || z > 2.0 * f) {
    throw Error(ErrorCode::OutOfRange, "z must lie in [f, 2f)");
  }
  PlaneParams p;
  p.z = z;
  p.eta = (z - f) / f;
  p.reduced_length =
      p.eta != 0.0 ? (2.0 * f - z) / p.eta : std::numeric_limits<double>::infinity();
  p.kappa = 2.0 * kPi * geom.slit_half_width / (geom.wavelength * (2.0 * f - z));
  p.delta = 0.5 * (geom.slit_count + 1);
  return p;
}

double sinc(double t) {
  const double at = std::abs(t);
  if (at < 1e-8) return 1.0;
  if (at < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

SlitField::SlitField(const OpticalGeometry& geom, double z)
    : dim_(geom.slit_count), plane_(plane_params(geom, z)) {
  scale_ = std::sqrt(plane_.kappa / kPi);
  phase_rate_ = plane_.kappa * geom.slit_separation / geom.slit_half_width;
  phase_period_ = 2.0 * kPi / phase_rate_;
  sinc_offset_.resize(dim_);
  for (int j = 1; j <= dim_; ++j) {
    sinc_offset_[j - 1] = geom.slit_separation * (j - plane_.delta) * plane_.eta;
  }
}

double SlitField::sinc_factor(int slit, double x) const {
  return sinc(plane_.kappa * (x + sinc_offset_[slit - 1]));
}

Complex SlitField::amplitude(int slit, double x) const {
  if (slit < 1 || slit > dim_) {
    throw Error(ErrorCode::OutOfRange, "slit index outside 1..D");
  }
  const double phase = phase_rate_ * x * (slit - 1);
  return std::polar(scale_ * sinc_factor(slit, x), phase);
}

void SlitField::amplitudes(double x, CVec& out) const {
  out.resize(dim_);
  const Complex step = std::polar(1.0, phase_rate_ * x);
  Complex phase = 1.0;
  for (int j = 1; j <= dim_; ++j) {
    out[j - 1] = scale_ * sinc_factor(j, x) * phase;
    phase *= step;
  }
}

double SlitField::envelope(double x) const {
  double s = 0.0;
  for (int j = 1; j <= dim_; ++j) {
    const double a = scale_ * sinc_factor(j, x);
    s += a * a;
  }
  return s;
}

PostselectedState postselected_state(const OpticalGeometry& geom, double x, double z) {
  const SlitField field(geom, z);
  PostselectedState st;
  st.x = x;
  st.z = z;
  field.amplitudes(x, st.amplitudes);
  st.norm2 = norm2(st.amplitudes);
  if (st.norm2 <= 1e-30) {
    throw Error(ErrorCode::DarkPoint, "all slit amplitudes vanish at the detection point",
                st.norm2);
  }
  const double inv = 1.0 / std::sqrt(st.norm2);
  st.normalized.resize(st.amplitudes.size());
  for (std::size_t i = 0; i < st.amplitudes.size(); ++i) st.normalized[i] = st.amplitudes[i] * inv;
  gauge_fix(st.normalized);
  return st;
}

PostselectedState image_plane_projector(const OpticalGeometry& geom, int slit) {
  validate_geometry(geom);
  if (slit < 1 || slit > geom.slit_count) {
    throw Error(ErrorCode::OutOfRange, "slit index outside 1..D");
  }
  const double delta = 0.5 * (geom.slit_count + 1);
  PostselectedState st;
  st.image_plane = true;
  st.z = 2.0 * geom.focal_length;
  st.x = geom.slit_separation * (slit - delta);
  st.normalized.assign(geom.slit_count, Complex{});
  st.normalized[slit - 1] = 1.0;
  st.amplitudes = st.normalized;
  st.norm2 = std::numeric_limits<double>::infinity();  // the limit diverges
  return st;
}

double detection_density(const DensityMatrix& rho, const OpticalGeometry& geom, double x,
                         double z) {
  check_density_dim(rho, geom);
  const SlitField field(geom, z);
  CVec phi;
  field.amplitudes(x, phi);
  const Complex val = expectation(rho.entries, phi);
  const double scale = std::max(norm2(phi), 1e-300);
  if (std::abs(val.imag()) > 1e-12 * scale) {
    throw Error(ErrorCode::NegativeDensity, "imaginary residue in the detection density",
                val.imag());
  }
  if (val.real() < 0.0) {
    if (val.real() < -1e-12 * scale) {
      throw Error(ErrorCode::NegativeDensity, "negative detection density", val.real());
    }
    return 0.0;
  }
  return val.real();
}

std::vector<double> outcome_probabilities(const DensityMatrix& rho,
                                          const std::vector<PostselectedState>& states,
                                          double orth_tol) {
  const int d = rho.dim;
  if (static_cast<int>(states.size()) != d) {
    throw Error(ErrorCode::DimensionMismatch, "need exactly D postselection points");
  }
  double worst = 0.0;
  int worst_a = 0, worst_b = 1;
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      const double ov = std::abs(inner(states[a].normalized, states[b].normalized));
      if (ov > worst) {
        worst = ov;
        worst_a = a;
        worst_b = b;
      }
    }
  }
  if (worst > orth_tol) {
    throw Error(ErrorCode::NotOrthogonal,
                "postselected states " + std::to_string(worst_a + 1) + "," +
                    std::to_string(worst_b + 1) + " overlap " + std::to_string(worst),
                worst);
  }

  std::vector<double> probs(d);
  double sum = 0.0;
  for (int l = 0; l < d; ++l) {
    const double p = std::max(0.0, expectation(rho.entries, states[l].normalized).real());
    probs[l] = p;
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotComplete, "outcome probabilities sum to " + std::to_string(sum),
                std::abs(sum - 1.0));
  }
  for (double& p : probs) p /= sum;
  return probs;
}

std::vector<double> outcome_probabilities(const DensityMatrix& rho, const OpticalGeometry& geom,
                                          const std::vector<double>& xs, double z,
                                          double orth_tol) {
  check_density_dim(rho, geom);
  std::vector<PostselectedState> states;
  states.reserve(xs.size());
  for (double x : xs) states.push_back(postselected_state(geom, x, z));
  return outcome_probabilities(rho, states, orth_tol);
}

BlochVector position_to_bloch(const OpticalGeometry& geom, double x, double z) {
  if (geom.slit_count != 2) {
    throw Error(ErrorCode::WrongDimension, "Bloch coordinates are defined for 2 slits");
  }
  return bloch_of(postselected_state(geom, x, z));
}

BlochVector bloch_of(const PostselectedState& state) {
  if (state.normalized.size() != 2) {
    throw Error(ErrorCode::WrongDimension, "Bloch coordinates are defined for 2 slits");
  }
  return qstate::bloch_from_pure(state.normalized);
}

double envelope(const OpticalGeometry& geom, double x, double z) {
  return SlitField(geom, z).envelope(x);
}

std::vector<ScanPoint> scan_density(const DensityMatrix& rho, const OpticalGeometry& geom,
                                    const std::vector<double>& xs, const std::vector<double>& zs,
                                    int threads) {
  check_density_dim(rho, geom);
  std::vector<ScanPoint> table(xs.size() * zs.size());

  const auto fill_row = [&](std::size_t zi) {
    const SlitField field(geom, zs[zi]);
    CVec phi;
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      field.amplitudes(xs[xi], phi);
      const double val = std::max(0.0, expectation(rho.entries, phi).real());
      table[zi * xs.size() + xi] = ScanPoint{xs[xi], zs[zi], val};
    }
  };

  if (threads <= 1 || zs.size() < 2) {
    for (std::size_t zi = 0; zi < zs.size(); ++zi) fill_row(zi);
  } else {
    // each z-row writes a disjoint slice, so the table is identical for
    // any thread count
    const std::size_t n = zs.size();
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t zi = w; zi < n; zi += workers) fill_row(zi);
      });
    }
    for (auto& t : pool) t.join();
  }
  return table;
}

}  // namespace slitsim::optics
