#pragma once

#include <vector>

#include "slitsim/cmatrix.hpp"
#include "slitsim/qstate.hpp"

namespace slitsim::optics {

using qstate::BlochVector;
using qstate::DensityMatrix;

/// D-slit aperture imaged by a lens of focal length f placed 2f behind it.
/// All lengths in meters. Detection planes live in z in [f, 2f): focal
/// plane at z=f, image plane z=2f only as an analytic special case.
struct OpticalGeometry {
  int slit_count = 2;
  double slit_half_width = 10e-6;   // a
  double slit_separation = 80e-6;   // d, center to center
  double wavelength = 800e-9;       // lambda
  double focal_length = 0.3;        // f
};

/// Throws ValidationError on non-positive lengths, overlapping slits
/// (d <= 2a) or a non-paraxial lambda/f ratio.
void validate_geometry(const OpticalGeometry& geom);

/// Derived per-plane quantities:
///   eta = (z - f) / f,
///   reduced_length Z = (2f - z) / eta  (infinite at the focal plane),
///   kappa = 2*pi*a / (lambda * (2f - z))  == 2*pi*a / (lambda*eta*Z),
///   delta = (D + 1) / 2.
struct PlaneParams {
  double z = 0.0;
  double eta = 0.0;
  double reduced_length = 0.0;
  double kappa = 0.0;
  double delta = 0.0;
};

PlaneParams plane_params(const OpticalGeometry& geom, double z);

/// sin(t)/t with sinc(0)=1; Taylor branch below 1e-4 to avoid cancellation.
double sinc(double t);

/// Slit-basis wave amplitudes on one detection plane,
///   phi_j(x) = sqrt(kappa/pi) * exp(i*kappa*x*d*(j-1)/a)
///            * sinc(kappa*(x + d*(j-delta)*eta)).
/// Precomputes the plane constants; the hot loops in the planner and the
/// scans run through this class.
class SlitField {
 public:
  SlitField(const OpticalGeometry& geom, double z);

  int dim() const { return dim_; }
  const PlaneParams& plane() const { return plane_; }

  Complex amplitude(int slit, double x) const;  // slit is 1-based
  void amplitudes(double x, CVec& out) const;
  /// sum_j |phi_j(x)|^2.
  double envelope(double x) const;
  /// Transverse period of the inter-slit phase kappa*x*d/a.
  double phase_period() const { return phase_period_; }
  /// Real sinc factor of slit j (amplitude without the phase and the
  /// sqrt(kappa/pi) scale).
  double sinc_factor(int slit, double x) const;
  double amplitude_scale() const { return scale_; }

 private:
  int dim_;
  PlaneParams plane_;
  double scale_;         // sqrt(kappa/pi)
  double phase_rate_;    // kappa*d/a
  double phase_period_;  // 2*pi / phase_rate
  std::vector<double> sinc_offset_;  // d*(j-delta)*eta per slit
};

/// Non-normalized postselected state at a detection point, plus its
/// normalized, gauge-fixed direction. `image_plane` marks the analytic
/// z -> 2f limit where the state is exactly one slit state and norm2
/// diverges (stored as +infinity).
struct PostselectedState {
  double x = 0.0;
  double z = 0.0;
  bool image_plane = false;
  CVec amplitudes;       // units m^(-1/2); equals `normalized` in the image-plane case
  double norm2 = 0.0;    // 1/m
  CVec normalized;
};

/// Throws DarkPoint when the total amplitude underflows (norm2 <= 1e-30).
PostselectedState postselected_state(const OpticalGeometry& geom, double x, double z);

/// Analytic image-plane projector onto slit `slit`, detected at
/// x = d*(slit - delta).
PostselectedState image_plane_projector(const OpticalGeometry& geom, int slit);

/// Tr[rho |phi(x,z)><phi(x,z)|] with the non-normalized state; >= 0, units 1/m.
double detection_density(const DensityMatrix& rho, const OpticalGeometry& geom, double x,
                         double z);

/// Born probabilities of a D-point postselection basis. The normalized
/// states must be pairwise orthogonal within `orth_tol` overlap modulus;
/// the result is renormalized if the unit-sum residue is <= 1e-9, else
/// NotComplete is thrown.
std::vector<double> outcome_probabilities(const DensityMatrix& rho,
                                          const std::vector<PostselectedState>& states,
                                          double orth_tol = 1e-6);
std::vector<double> outcome_probabilities(const DensityMatrix& rho, const OpticalGeometry& geom,
                                          const std::vector<double>& xs, double z,
                                          double orth_tol = 1e-6);

BlochVector position_to_bloch(const OpticalGeometry& geom, double x, double z);
BlochVector bloch_of(const PostselectedState& state);

/// sum_j |phi_j(x,z)|^2, the diffraction envelope.
double envelope(const OpticalGeometry& geom, double x, double z);

struct ScanPoint {
  double x = 0.0;
  double z = 0.0;
  double density = 0.0;
};

/// Detection density over a grid, z outer, x inner. The row order is
/// deterministic for any thread count.
std::vector<ScanPoint> scan_density(const DensityMatrix& rho, const OpticalGeometry& geom,
                                    const std::vector<double>& xs, const std::vector<double>& zs,
                                    int threads = 1);

}  // namespace slitsim::optics
