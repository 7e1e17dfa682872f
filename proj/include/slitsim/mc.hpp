#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "slitsim/planner.hpp"

namespace slitsim::mc {

using planner::PovmPlan;
using planner::SpatialPlan;
using qstate::DensityMatrix;
using qstate::Observable;
using optics::OpticalGeometry;

/// Pointlike-detector idealization bridged to integer counts: a photon
/// clicks with probability efficiency * density * 2w (midpoint rule over a
/// pinhole of half-width w). At the analytic image plane the pinhole
/// captures the whole slit image, so the click probability is
/// efficiency * outcome probability instead.
struct DetectorModel {
  double pinhole_halfwidth = 1e-6;  // w, meters
  double efficiency = 1.0;          // in (0, 1]
  std::uint64_t shots = 100000;     // photons per setting
};

void validate_detector(const DetectorModel& model);

using Plan = std::variant<PovmPlan, SpatialPlan>;

/// Counts per outcome: binomial(shots, q_l) with one decorrelated RNG
/// substream per outcome (stream id = outcome index), so results are
/// identical for any thread count.
struct CountRecord {
  Plan plan;
  std::vector<std::uint64_t> counts;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
};

CountRecord simulate_counts(const DensityMatrix& rho, const Plan& plan,
                            const OpticalGeometry& geom, const DetectorModel& model,
                            std::uint64_t seed, int threads = 1);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Normalized frequencies p_l = counts_l / total with binomial standard
/// errors sqrt(p(1-p)/total).
std::vector<Estimate> estimate_probabilities(const CountRecord& record);

/// sum_l lambda_l p_l with multinomial error propagation. The record's plan
/// must have been built for `obs` (PlanMismatch otherwise).
Estimate estimate_expectation(const Observable& obs, const CountRecord& record);

/// Linear-inversion qubit state from the three Pauli expectations; Bloch
/// vectors pushed outside the sphere by noise are projected back radially,
/// so the result always validates.
DensityMatrix reconstruct_qubit(const Estimate& sx, const Estimate& sy, const Estimate& sz);

struct TomographyReport {
  Estimate sx, sy, sz;
  DensityMatrix reconstructed;
  double trace_distance = 0.0;
};

/// Three-Pauli tomography of `rho_true` through fixed-detector plans.
/// Pauli k is simulated with the derived seed substream_seed(seed, 100+k).
TomographyReport run_tomography(const DensityMatrix& rho_true, const OpticalGeometry& geom,
                                const DetectorModel& model, std::uint64_t seed,
                                bool rescale = false, int threads = 1);

}  // namespace slitsim::mc
