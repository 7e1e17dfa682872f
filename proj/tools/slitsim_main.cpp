#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slitsim/error.hpp"
#include "slitsim/io.hpp"
#include "slitsim/mc.hpp"
#include "slitsim/optics.hpp"
#include "slitsim/planner.hpp"

namespace {

using namespace slitsim;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ValidationError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ValidationError, "cannot write " + path);
  out << content;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw Error(ErrorCode::ValidationError, "grid needs at least one point");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

mc::Plan build_plan(const io::ExperimentConfig& config, const std::string& observable,
                    const std::string& strategy) {
  const qstate::Observable obs = io::observable_from_name(observable, config);
  if (strategy == "povm") {
    return planner::plan_povm(obs, config.geometry, config.rescale);
  }
  if (strategy == "spatial") {
    return planner::plan_spatial(obs, config.geometry);
  }
  throw Error(ErrorCode::ValidationError, "unknown strategy '" + strategy + "'");
}

planner::Statistics plan_statistics(const io::ExperimentConfig& config, const mc::Plan& plan) {
  if (const auto* p = std::get_if<planner::PovmPlan>(&plan)) {
    return planner::predicted_statistics(config.state, *p, config.geometry);
  }
  return planner::predicted_statistics(config.state, std::get<planner::SpatialPlan>(plan),
                                       config.geometry);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slitsim: measurement planning and photon-counting simulation for slit-encoded qubits"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path = "-";
  int threads = 1;
  app.add_option("--config", config_path, "JSON experiment config (defaults used when absent)");
  app.add_option("--out", out_path, "output path, '-' for stdout");
  app.add_option("--threads", threads, "worker threads for scan and simulate")
      ->check(CLI::PositiveNumber);

  // params
  auto* cmd_params = app.add_subcommand("params", "derived plane parameters at z");
  double params_z = -1.0;
  cmd_params->add_option("--z", params_z, "detection plane z in meters (default: focal plane)");

  // scan
  auto* cmd_scan = app.add_subcommand("scan", "detection-density table over an (x, z) grid");
  double scan_xmin = 0.0, scan_xmax = 0.0, scan_zmin = -1.0, scan_zmax = -1.0;
  int scan_nx = 201, scan_nz = 1;
  bool scan_x_set = false;
  cmd_scan->add_option("--xmin", scan_xmin, "left edge in meters")->each([&](const std::string&) {
    scan_x_set = true;
  });
  cmd_scan->add_option("--xmax", scan_xmax, "right edge in meters");
  cmd_scan->add_option("--nx", scan_nx, "x samples")->check(CLI::PositiveNumber);
  cmd_scan->add_option("--zmin", scan_zmin, "first plane (default: focal plane)");
  cmd_scan->add_option("--zmax", scan_zmax, "last plane (default: zmin)");
  cmd_scan->add_option("--nz", scan_nz, "z samples")->check(CLI::PositiveNumber);

  // state-at
  auto* cmd_state = app.add_subcommand("state-at", "postselected state at a detection point");
  double state_x = 0.0, state_z = -1.0;
  int state_image_slit = 0;
  cmd_state->add_option("--x", state_x, "transverse position in meters");
  cmd_state->add_option("--z", state_z, "plane in meters (default: focal plane)");
  cmd_state->add_option("--image-plane", state_image_slit,
                        "slit index: emit the analytic image-plane projector instead");

  // plan / measure / simulate share observable+strategy options
  std::string observable = "sigma_z";
  std::string strategy = "povm";
  bool rescale_flag = false;

  auto* cmd_plan = app.add_subcommand("plan", "measurement plan for an observable");
  auto* cmd_measure = app.add_subcommand("measure", "analytic probabilities and expectation");
  auto* cmd_simulate = app.add_subcommand("simulate", "photon-counting run with estimates");
  for (CLI::App* cmd : {cmd_plan, cmd_measure, cmd_simulate}) {
    cmd->add_option("--observable", observable, "sigma_x|sigma_y|sigma_z|config");
    cmd->add_option("--strategy", strategy, "povm|spatial");
    cmd->add_flag("--rescale", rescale_flag, "success-probability rescaling for povm plans");
  }

  std::uint64_t shots_override = 0;
  bool shots_set = false;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  auto* cmd_tomo = app.add_subcommand("tomo", "three-Pauli tomography of the config state");
  for (CLI::App* cmd : {cmd_simulate, cmd_tomo}) {
    cmd->add_option("--shots", shots_override, "photons per setting")
        ->each([&](const std::string&) { shots_set = true; });
    cmd->add_option("--seed", seed_override, "run seed")->each([&](const std::string&) {
      seed_set = true;
    });
  }
  cmd_tomo->add_flag("--rescale", rescale_flag, "success-probability rescaling");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR ValidationError " << e.what() << "\n";
    return 1;
  }

  try {
    io::ExperimentConfig config =
        config_path.empty() ? io::default_config() : io::parse_config(read_file(config_path));
    if (rescale_flag) config.rescale = true;
    if (shots_set) config.detector.shots = shots_override;
    if (seed_set) config.seed = seed_override;
    mc::validate_detector(config.detector);
    const double f = config.geometry.focal_length;

    if (*cmd_params) {
      const double z = params_z < 0.0 ? f : params_z;
      write_output(out_path, io::write_params_csv(optics::plane_params(config.geometry, z)));
    } else if (*cmd_scan) {
      if (!scan_x_set) {
        const double span =
            5.0 * config.geometry.wavelength * f / config.geometry.slit_separation;
        scan_xmin = -span;
        scan_xmax = span;
      }
      const double zlo = scan_zmin < 0.0 ? f : scan_zmin;
      const double zhi = scan_zmax < 0.0 ? zlo : scan_zmax;
      const auto table = optics::scan_density(config.state, config.geometry,
                                              linspace(scan_xmin, scan_xmax, scan_nx),
                                              linspace(zlo, zhi, scan_nz), threads);
      write_output(out_path, io::write_scan_csv(table));
    } else if (*cmd_state) {
      const optics::PostselectedState st =
          state_image_slit > 0
              ? optics::image_plane_projector(config.geometry, state_image_slit)
              : optics::postselected_state(config.geometry, state_x,
                                           state_z < 0.0 ? f : state_z);
      write_output(out_path, io::write_state_json(st));
    } else if (*cmd_plan) {
      write_output(out_path, io::write_plan(build_plan(config, observable, strategy)));
    } else if (*cmd_measure) {
      const mc::Plan plan = build_plan(config, observable, strategy);
      write_output(out_path, io::write_measure_csv(plan_statistics(config, plan)));
    } else if (*cmd_simulate) {
      const mc::Plan plan = build_plan(config, observable, strategy);
      const mc::CountRecord record = mc::simulate_counts(
          config.state, plan, config.geometry, config.detector, config.seed, threads);
      write_output(out_path, io::write_counts_csv(
                                 record, io::observable_from_name(observable, config)));
    } else if (*cmd_tomo) {
      const mc::TomographyReport report = mc::run_tomography(
          config.state, config.geometry, config.detector, config.seed, config.rescale, threads);
      write_output(out_path, io::write_tomo_json(report, config.detector.shots, config.seed));
    }
  } catch (const Error& e) {
    std::cerr << "ERROR " << to_string(e.code()) << " " << e.message() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "ERROR Internal " << e.what() << "\n";
    return 1;
  }
  return 0;
}
