#pragma once

#include <vector>

#include "slitsim/optics.hpp"
#include "slitsim/povm.hpp"
#include "slitsim/qstate.hpp"

namespace slitsim::planner {

using optics::OpticalGeometry;
using optics::PostselectedState;
using povm::LcdSettings;
using qstate::DensityMatrix;
using qstate::Observable;

/// Fixed-detector strategy: one settings block per outcome, photon detected
/// at the envelope maximum (0, z).
struct PovmPlan {
  Observable observable;
  std::vector<double> eigenvalues;       // descending
  std::vector<LcdSettings> settings;     // settings[l] synthesized from eigenvector l
  double detection_x = 0.0;
  double detection_z = 0.0;
  bool degenerate = false;
};

/// Moving-detector strategy: one transverse position per outcome on a
/// shared plane (or the analytic image plane), envelope compensation
/// factors normalized to min 1, and the realized projector fidelities.
struct SpatialPlan {
  Observable observable;
  std::vector<double> eigenvalues;
  bool image_plane = false;
  double z = 0.0;                         // 2f when image_plane
  std::vector<double> positions;          // x_l for eigenvector l
  std::vector<double> compensation;
  std::vector<double> fidelities;
  bool degenerate = false;
};

/// Eigenbasis -> synthesized settings per eigenvector; detection point
/// (0, f). Works for any D.
PovmPlan plan_povm(const Observable& obs, const OpticalGeometry& geom, bool rescale = false);

/// Finds a shared plane z and positions x_l whose postselected states
/// realize the eigenvectors (two slits only). Slit-state targets map to the
/// image plane, equal-modulus targets to the focal plane, targets with
/// relative phase +-pi/2 to a symmetric pair around the axis; everything
/// else goes through a grid search refined until both fidelities reach
/// 1 - 1e-6 and the realized pair is orthogonal to 1e-10, or SearchFailed
/// reports the best fidelities found.
SpatialPlan plan_spatial(const Observable& obs, const OpticalGeometry& geom);

/// Fixed-detector plan that mimics the projectors a spatial plan actually
/// realizes (settings synthesized from the postselected states at the
/// plan's positions). This is the construction that makes the two
/// strategies agree identically, independent of how well the positions hit
/// the eigenvectors.
PovmPlan plan_povm_from_spatial(const SpatialPlan& plan, const OpticalGeometry& geom,
                                bool rescale = false);

/// Postselected states at the plan's detection points (exact slit states
/// for an image-plane plan).
std::vector<PostselectedState> realized_states(const OpticalGeometry& geom,
                                               const SpatialPlan& plan);

/// Inverse diffraction-envelope weights at the plan positions, normalized
/// so the smallest factor is 1. Raw count rates multiplied by these factors
/// normalize to the basis probabilities.
std::vector<double> compensation_factors(const OpticalGeometry& geom, const SpatialPlan& plan);

struct Statistics {
  std::vector<double> probabilities;
  double expectation = 0.0;
};

Statistics predicted_statistics(const DensityMatrix& rho, const PovmPlan& plan,
                                const OpticalGeometry& geom);
Statistics predicted_statistics(const DensityMatrix& rho, const SpatialPlan& plan,
                                const OpticalGeometry& geom);

}  // namespace slitsim::planner
