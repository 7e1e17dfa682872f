#pragma once

#include <optional>
#include <vector>

#include "slitsim/cmatrix.hpp"
#include "slitsim/optics.hpp"
#include "slitsim/qstate.hpp"

namespace slitsim::povm {

using optics::OpticalGeometry;
using qstate::DensityMatrix;

/// Per-slit half-wave-plate angles theta_j (polarization rotates by
/// 2*theta_j) and phase shifts phi_j of the conditional unitary, as
/// programmed on a multipixel display behind the slits.
///
/// Invariants: theta_j in [-pi/4, pi/4], phi_j in [0, 2*pi), phi of the
/// first slit 0 (global-phase gauge). `rescale_weight` records the factor
/// c >= 1 folded into the angles when success-probability rescaling is on
/// (1 otherwise); recorded rates are divided by c^2 to recover unscaled
/// statistics.
struct LcdSettings {
  int dim = 0;
  std::vector<double> thetas;
  std::vector<double> phis;
  double rescale_weight = 1.0;
};

/// Range/gauge checks; throws ValidationError.
void validate_settings(const LcdSettings& settings);

/// Polarization readout outcome, ancilla prepared in H.
enum class Outcome { H, V };

/// Kraus operators and POVM elements of the two-outcome measurement:
/// A_H = diag(e^{i phi_j} cos(2 theta_j)), A_V = diag(e^{i phi_j} sin(2 theta_j)),
/// Pi_p = A_p^dag A_p, Pi_H + Pi_V = I.
struct PovmPair {
  CMat a_h, a_v;
  CMat pi_h, pi_v;
};

/// Post-measurement state A_p rho A_p^dag / P_p and its probability
/// P_p = Tr(Pi_p rho). The state is undefined when P_p <= 1e-12; asking
/// for it then throws ImpossibleOutcome.
struct OutcomeResult {
  double probability = 0.0;
  std::optional<DensityMatrix> post_state;
  const DensityMatrix& state() const;
};

CVec kraus_diagonal(const LcdSettings& settings, Outcome p);

/// Full 2D x 2D conditional unitary sum_j e^{i phi_j} |j><j| (x) R(theta_j)
/// with R the 2*theta rotation in the {H, V} polarization basis. Index
/// order: (slit, polarization) -> 2*(j-1) + p. Kept as a cross-check for
/// the contracted Kraus form.
CMat build_unitary(const LcdSettings& settings);

PovmPair povm_elements(const LcdSettings& settings);

OutcomeResult apply_outcome(const DensityMatrix& rho, const LcdSettings& settings, Outcome p);

/// Total detection density at the fixed point (0, z) after a successful
/// H outcome:
///   |phi_1(0,z)|^2 * sum_ij rho_ij e^{i(phi_i - phi_j)} cos(2 theta_i) cos(2 theta_j).
/// The envelope prefactor assumes equal slit amplitudes at the detection
/// point, which holds at every plane for two slits and at the focal plane
/// for more.
double total_density(const DensityMatrix& rho, const LcdSettings& settings,
                     const OpticalGeometry& geom, double z);

/// Settings reproducing the statistics of the normalized projector
/// `target`: e^{i phi_j} cos(2 theta_j) = c * conj(target_j) with c = 1, or
/// c = 1/max_j |target_j| when `rescale` is set (boosting the success
/// probability by c^2). Phases of zero-amplitude slits are set to 0.
LcdSettings synthesize_settings(const CVec& target, bool rescale = false);

/// Measured basis implied by a list of settings (conjugate Kraus diagonal
/// over the rescale weight).
std::vector<CVec> settings_targets(const std::vector<LcdSettings>& settings);

/// Normalized count rates of D settings synthesized from an orthonormal
/// basis, detected at the fixed point (0, z): total densities divided by
/// rescale_weight^2, then normalized across outcomes. Invariant under the
/// choice of z (the envelope factor cancels).
std::vector<double> fixed_point_probabilities(const DensityMatrix& rho,
                                              const std::vector<LcdSettings>& settings,
                                              const OpticalGeometry& geom, double z);

}  // namespace slitsim::povm
