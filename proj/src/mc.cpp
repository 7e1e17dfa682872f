#include "slitsim/mc.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "slitsim/error.hpp"
#include "slitsim/rng.hpp"

namespace slitsim::mc {

namespace {

std::vector<double> click_probabilities(const DensityMatrix& rho, const Plan& plan,
                                        const OpticalGeometry& geom, const DetectorModel& model) {
  std::vector<double> q;
  if (const auto* povm_plan = std::get_if<PovmPlan>(&plan)) {
    const int d = rho.dim;
    q.resize(d);
    for (int l = 0; l < d; ++l) {
      const auto& s = povm_plan->settings[l];
      const double density =
          povm::total_density(rho, s, geom, povm_plan->detection_z) /
          (s.rescale_weight * s.rescale_weight);
      q[l] = model.efficiency * density * 2.0 * model.pinhole_halfwidth;
    }
  } else {
    const auto& spatial = std::get<SpatialPlan>(plan);
    const int d = rho.dim;
    q.resize(d);
    if (spatial.image_plane) {
      // the slit images shrink to points, the pinhole collects them whole
      const auto probs = planner::predicted_statistics(rho, spatial, geom).probabilities;
      for (int l = 0; l < d; ++l) q[l] = model.efficiency * probs[l];
    } else {
      for (int l = 0; l < d; ++l) {
        const double density =
            optics::detection_density(rho, geom, spatial.positions[l], spatial.z) *
            spatial.compensation[l];
        q[l] = model.efficiency * density * 2.0 * model.pinhole_halfwidth;
      }
    }
  }
  for (double p : q) {
    if (p > 1.0) {
      throw Error(ErrorCode::ClickProbabilityOverflow,
                  "click probability " + std::to_string(p) + " > 1; narrow the pinhole", p);
    }
  }
  return q;
}

}  // namespace

void validate_detector(const DetectorModel& model) {
  if (model.pinhole_halfwidth <= 0.0) {
    throw Error(ErrorCode::ValidationError, "pinhole half-width must be positive");
  }
  if (model.efficiency <= 0.0 || model.efficiency > 1.0) {
    throw Error(ErrorCode::ValidationError, "efficiency must lie in (0, 1]");
  }
  if (model.shots == 0) {
    throw Error(ErrorCode::ValidationError, "shots must be >= 1");
  }
}

CountRecord simulate_counts(const DensityMatrix& rho, const Plan& plan,
                            const OpticalGeometry& geom, const DetectorModel& model,
                            std::uint64_t seed, int threads) {
  validate_detector(model);
  const std::vector<double> q = click_probabilities(rho, plan, geom, model);

  CountRecord record;
  record.plan = plan;
  record.shots = model.shots;
  record.seed = seed;
  record.counts.assign(q.size(), 0);

  const auto sample = [&](std::size_t l) {
    Rng rng = Rng::substream(seed, l);
    record.counts[l] = rng.binomial(model.shots, q[l]);
  };

  if (threads <= 1 || q.size() < 2) {
    for (std::size_t l = 0; l < q.size(); ++l) sample(l);
  } else {
    const std::size_t workers = std::min<std::size_t>(threads, q.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t l = w; l < q.size(); l += workers) sample(l);
      });
    }
    for (auto& t : pool) t.join();
  }
  return record;
}

std::vector<Estimate> estimate_probabilities(const CountRecord& record) {
  std::uint64_t total = 0;
  for (std::uint64_t c : record.counts) total += c;
  if (total == 0) {
    throw Error(ErrorCode::NoCounts, "no clicks recorded; cannot normalize");
  }
  std::vector<Estimate> est(record.counts.size());
  for (std::size_t l = 0; l < est.size(); ++l) {
    const double p = static_cast<double>(record.counts[l]) / static_cast<double>(total);
    est[l] = Estimate{p, std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(total)))};
  }
  return est;
}

namespace {

const std::vector<double>& plan_eigenvalues(const Plan& plan) {
  if (const auto* p = std::get_if<PovmPlan>(&plan)) return p->eigenvalues;
  return std::get<SpatialPlan>(plan).eigenvalues;
}

const Observable& plan_observable(const Plan& plan) {
  if (const auto* p = std::get_if<PovmPlan>(&plan)) return p->observable;
  return std::get<SpatialPlan>(plan).observable;
}

}  // namespace

Estimate estimate_expectation(const Observable& obs, const CountRecord& record) {
  const Observable& planned = plan_observable(record.plan);
  if (planned.dim != obs.dim || (planned.entries - obs.entries).max_abs() > 1e-12) {
    throw Error(ErrorCode::PlanMismatch, "record was produced for a different observable");
  }
  const std::vector<Estimate> probs = estimate_probabilities(record);
  const std::vector<double>& lambda = plan_eigenvalues(record.plan);

  std::uint64_t total = 0;
  for (std::uint64_t c : record.counts) total += c;

  double value = 0.0;
  double second = 0.0;
  for (std::size_t l = 0; l < probs.size(); ++l) {
    value += lambda[l] * probs[l].value;
    second += lambda[l] * lambda[l] * probs[l].value;
  }
  const double var = std::max(0.0, (second - value * value) / static_cast<double>(total));
  return Estimate{value, std::sqrt(var)};
}

DensityMatrix reconstruct_qubit(const Estimate& sx, const Estimate& sy, const Estimate& sz) {
  double rx = sx.value;
  double ry = sy.value;
  double rz = sz.value;
  const double r = std::sqrt(rx * rx + ry * ry + rz * rz);
  if (r > 1.0) {
    rx /= r;
    ry /= r;
    rz /= r;
  }
  CMat m(2);
  m(0, 0) = Complex(0.5 * (1.0 + rz), 0.0);
  m(1, 1) = Complex(0.5 * (1.0 - rz), 0.0);
  m(0, 1) = Complex(0.5 * rx, -0.5 * ry);
  m(1, 0) = Complex(0.5 * rx, 0.5 * ry);
  return qstate::validate_density(m);
}

TomographyReport run_tomography(const DensityMatrix& rho_true, const OpticalGeometry& geom,
                                const DetectorModel& model, std::uint64_t seed, bool rescale,
                                int threads) {
  const Observable paulis[3] = {qstate::sigma_x(), qstate::sigma_y(), qstate::sigma_z()};
  Estimate est[3];
  for (int k = 0; k < 3; ++k) {
    const PovmPlan plan = planner::plan_povm(paulis[k], geom, rescale);
    const CountRecord record =
        simulate_counts(rho_true, plan, geom, model, substream_seed(seed, 100 + k), threads);
    est[k] = estimate_expectation(paulis[k], record);
  }
  TomographyReport report;
  report.sx = est[0];
  report.sy = est[1];
  report.sz = est[2];
  report.reconstructed = reconstruct_qubit(est[0], est[1], est[2]);
  report.trace_distance = qstate::trace_distance(report.reconstructed, rho_true);
  return report;
}

}  // namespace slitsim::mc
