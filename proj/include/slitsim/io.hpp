#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slitsim/mc.hpp"
#include "slitsim/planner.hpp"

namespace slitsim::io {

/// One experiment description: geometry, input state, detector, seed and
/// the rescale flag, plus an optional inline observable. The canonical JSON
/// form (alphabetical keys, up to 17 significant digits, LF endings) is a
/// fixed point of parse/write.
struct ExperimentConfig {
  optics::OpticalGeometry geometry;
  qstate::DensityMatrix state;
  std::optional<qstate::Observable> observable;
  mc::DetectorModel detector;
  std::uint64_t seed = 0;
  bool rescale = false;
};

/// All defaults: two 10 um half-width slits 80 um apart, 800 nm light,
/// f = 0.3 m, maximally mixed state, ideal 1 um pinhole, 1e5 shots, seed 0.
ExperimentConfig default_config();

/// Parses and validates a JSON config; missing fields fall back to the
/// defaults above, unknown keys are rejected. State entries are numbers or
/// [re, im] pairs.
ExperimentConfig parse_config(const std::string& text);

std::string write_config(const ExperimentConfig& config);

std::string write_plan(const mc::Plan& plan);
mc::Plan parse_plan(const std::string& text);

/// CSV, one row per outcome: outcome,count,shots,seed,p_hat,p_stderr,
/// expectation,expectation_stderr.
std::string write_counts_csv(const mc::CountRecord& record, const qstate::Observable& obs);

struct ParsedCounts {
  std::vector<std::uint64_t> counts;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
};
ParsedCounts parse_counts_csv(const std::string& text);

/// CSV columns x_m,z_m,density_per_m, z outer and x inner.
std::string write_scan_csv(const std::vector<optics::ScanPoint>& table);

/// CSV columns z_m,eta,Z_m,kappa_per_m,delta (single row).
std::string write_params_csv(const optics::PlaneParams& params);

/// CSV columns p_1..p_D,expectation (single row).
std::string write_measure_csv(const planner::Statistics& stats);

/// JSON record of a postselected state; Bloch angles included for qubits.
std::string write_state_json(const optics::PostselectedState& state);

std::string write_tomo_json(const mc::TomographyReport& report, std::uint64_t shots,
                            std::uint64_t seed);

/// Named Pauli, or "config" for the observable block of the config.
qstate::Observable observable_from_name(const std::string& name, const ExperimentConfig& config);

/// Shortest representation within 17 significant digits, "-0" normalized.
std::string format_double(double value);

}  // namespace slitsim::io
