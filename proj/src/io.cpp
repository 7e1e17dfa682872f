#include "slitsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "slitsim/error.hpp"

namespace slitsim::io {

namespace {

using nlohmann::json;

std::string jstr(const std::string& s) { return "\"" + s + "\""; }

std::string pair_json(const Complex& c) {
  return "[" + format_double(c.real()) + "," + format_double(c.imag()) + "]";
}

std::string matrix_json(const CMat& m) {
  std::string out = "{\"rows\":[";
  for (int i = 0; i < m.dim(); ++i) {
    if (i) out += ",";
    out += "[";
    for (int j = 0; j < m.dim(); ++j) {
      if (j) out += ",";
      out += pair_json(m(i, j));
    }
    out += "]";
  }
  out += "]}";
  return out;
}

std::string real_array_json(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  out += "]";
  return out;
}

Complex parse_entry(const json& e, const std::string& where) {
  if (e.is_number()) return Complex(e.get<double>(), 0.0);
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
    return Complex(e[0].get<double>(), e[1].get<double>());
  }
  throw Error(ErrorCode::ValidationError, where + ": entries must be numbers or [re, im] pairs");
}

CMat parse_matrix(const json& node, const std::string& where) {
  if (!node.is_object() || !node.contains("rows") || !node["rows"].is_array()) {
    throw Error(ErrorCode::ValidationError, where + ": expected an object with a rows array");
  }
  const json& rows = node["rows"];
  const int n = static_cast<int>(rows.size());
  if (n < 2) throw Error(ErrorCode::ValidationError, where + ": needs at least 2 rows");
  CMat m(n);
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n) {
      throw Error(ErrorCode::ValidationError, where + ": rows must form a square matrix");
    }
    for (int j = 0; j < n; ++j) m(i, j) = parse_entry(rows[i][j], where);
  }
  return m;
}

void reject_unknown_keys(const json& node, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& item : node.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw Error(ErrorCode::ValidationError, where + ": unknown key '" + item.key() + "'");
    }
  }
}

double get_number(const json& node, const char* key, double fallback, const std::string& where) {
  if (!node.contains(key)) return fallback;
  if (!node[key].is_number()) {
    throw Error(ErrorCode::ValidationError, where + "." + key + ": expected a number");
  }
  return node[key].get<double>();
}

std::vector<double> parse_real_array(const json& node, const std::string& where) {
  if (!node.is_array()) throw Error(ErrorCode::ValidationError, where + ": expected an array");
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& e : node) {
    if (!e.is_number()) throw Error(ErrorCode::ValidationError, where + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string settings_json(const povm::LcdSettings& s) {
  return "{\"phis_rad\":" + real_array_json(s.phis) +
         ",\"rescale_weight\":" + format_double(s.rescale_weight) +
         ",\"thetas_rad\":" + real_array_json(s.thetas) + "}";
}

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) return "0";  // normalizes -0 as well
  char buf[40];
  // shortest form that round-trips, capped at 17 significant digits
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

ExperimentConfig default_config() {
  ExperimentConfig config;
  config.geometry = optics::OpticalGeometry{};
  CMat mixed(config.geometry.slit_count);
  for (int i = 0; i < config.geometry.slit_count; ++i) {
    mixed(i, i) = 1.0 / config.geometry.slit_count;
  }
  config.state = qstate::validate_density(mixed);
  config.detector = mc::DetectorModel{};
  return config;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  reject_unknown_keys(root, {"detector", "geometry", "observable", "rescale", "seed", "state"},
                      "config");

  ExperimentConfig config;

  if (root.contains("geometry")) {
    const json& g = root["geometry"];
    reject_unknown_keys(g, {"D", "a_m", "d_m", "f_m", "lambda_m"}, "geometry");
    optics::OpticalGeometry geom;
    if (g.contains("D")) {
      if (!g["D"].is_number_integer()) {
        throw Error(ErrorCode::ValidationError, "geometry.D: expected an integer");
      }
      geom.slit_count = g["D"].get<int>();
    }
    geom.slit_half_width = get_number(g, "a_m", geom.slit_half_width, "geometry");
    geom.slit_separation = get_number(g, "d_m", geom.slit_separation, "geometry");
    geom.wavelength = get_number(g, "lambda_m", geom.wavelength, "geometry");
    geom.focal_length = get_number(g, "f_m", geom.focal_length, "geometry");
    config.geometry = geom;
  }
  optics::validate_geometry(config.geometry);

  if (root.contains("state")) {
    config.state = qstate::validate_density(parse_matrix(root["state"], "state"));
    if (config.state.dim != config.geometry.slit_count) {
      throw Error(ErrorCode::ValidationError,
                  "state: dimension does not match geometry.D = " +
                      std::to_string(config.geometry.slit_count));
    }
  } else {
    CMat mixed(config.geometry.slit_count);
    for (int i = 0; i < config.geometry.slit_count; ++i) {
      mixed(i, i) = 1.0 / config.geometry.slit_count;
    }
    config.state = qstate::validate_density(mixed);
  }

  if (root.contains("observable")) {
    config.observable = qstate::make_observable(parse_matrix(root["observable"], "observable"));
    if (config.observable->dim != config.geometry.slit_count) {
      throw Error(ErrorCode::ValidationError, "observable: dimension does not match geometry.D");
    }
  }

  if (root.contains("detector")) {
    const json& d = root["detector"];
    reject_unknown_keys(d, {"efficiency", "shots", "w_m"}, "detector");
    config.detector.pinhole_halfwidth =
        get_number(d, "w_m", config.detector.pinhole_halfwidth, "detector");
    config.detector.efficiency = get_number(d, "efficiency", config.detector.efficiency, "detector");
    if (d.contains("shots")) {
      if (!d["shots"].is_number_unsigned()) {
        throw Error(ErrorCode::ValidationError, "detector.shots: expected a non-negative integer");
      }
      config.detector.shots = d["shots"].get<std::uint64_t>();
    }
  }
  mc::validate_detector(config.detector);

  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) {
      throw Error(ErrorCode::ValidationError, "seed: expected a non-negative integer");
    }
    config.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("rescale")) {
    if (!root["rescale"].is_boolean()) {
      throw Error(ErrorCode::ValidationError, "rescale: expected a boolean");
    }
    config.rescale = root["rescale"].get<bool>();
  }
  return config;
}

std::string write_config(const ExperimentConfig& config) {
  std::string out = "{";
  out += "\"detector\":{\"efficiency\":" + format_double(config.detector.efficiency) +
         ",\"shots\":" + std::to_string(config.detector.shots) +
         ",\"w_m\":" + format_double(config.detector.pinhole_halfwidth) + "}";
  out += ",\"geometry\":{\"D\":" + std::to_string(config.geometry.slit_count) +
         ",\"a_m\":" + format_double(config.geometry.slit_half_width) +
         ",\"d_m\":" + format_double(config.geometry.slit_separation) +
         ",\"f_m\":" + format_double(config.geometry.focal_length) +
         ",\"lambda_m\":" + format_double(config.geometry.wavelength) + "}";
  if (config.observable) out += ",\"observable\":" + matrix_json(config.observable->entries);
  out += std::string(",\"rescale\":") + (config.rescale ? "true" : "false");
  out += ",\"seed\":" + std::to_string(config.seed);
  out += ",\"state\":" + matrix_json(config.state.entries);
  out += "}\n";
  return out;
}

std::string write_plan(const mc::Plan& plan) {
  std::string out = "{";
  if (const auto* p = std::get_if<planner::PovmPlan>(&plan)) {
    out += std::string("\"degenerate\":") + (p->degenerate ? "true" : "false");
    out += ",\"detection\":{\"x_m\":" + format_double(p->detection_x) +
           ",\"z_m\":" + format_double(p->detection_z) + "}";
    out += ",\"eigenvalues\":" + real_array_json(p->eigenvalues);
    out += ",\"observable\":" + matrix_json(p->observable.entries);
    out += ",\"settings\":[";
    for (std::size_t l = 0; l < p->settings.size(); ++l) {
      if (l) out += ",";
      out += settings_json(p->settings[l]);
    }
    out += "]";
    out += ",\"strategy\":" + jstr("povm");
  } else {
    const auto& s = std::get<planner::SpatialPlan>(plan);
    out += "\"compensation\":" + real_array_json(s.compensation);
    out += std::string(",\"degenerate\":") + (s.degenerate ? "true" : "false");
    out += ",\"eigenvalues\":" + real_array_json(s.eigenvalues);
    out += ",\"fidelities\":" + real_array_json(s.fidelities);
    if (s.image_plane) out += ",\"image_plane\":true";
    out += ",\"observable\":" + matrix_json(s.observable.entries);
    out += ",\"positions_m\":" + real_array_json(s.positions);
    out += ",\"strategy\":" + jstr("spatial");
    if (!s.image_plane) out += ",\"z_m\":" + format_double(s.z);
  }
  out += "}\n";
  return out;
}

mc::Plan parse_plan(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!root.is_object() || !root.contains("strategy") || !root["strategy"].is_string()) {
    throw Error(ErrorCode::ParseError, "plan: missing strategy");
  }
  const std::string strategy = root["strategy"].get<std::string>();

  if (strategy == "povm") {
    reject_unknown_keys(root,
                        {"degenerate", "detection", "eigenvalues", "observable", "settings",
                         "strategy"},
                        "plan");
    planner::PovmPlan plan;
    plan.degenerate = root.value("degenerate", false);
    plan.observable = qstate::make_observable(parse_matrix(root.at("observable"), "observable"));
    plan.eigenvalues = parse_real_array(root.at("eigenvalues"), "eigenvalues");
    const json& det = root.at("detection");
    plan.detection_x = get_number(det, "x_m", 0.0, "detection");
    plan.detection_z = get_number(det, "z_m", 0.0, "detection");
    for (const json& s : root.at("settings")) {
      povm::LcdSettings settings;
      settings.thetas = parse_real_array(s.at("thetas_rad"), "thetas_rad");
      settings.phis = parse_real_array(s.at("phis_rad"), "phis_rad");
      settings.rescale_weight = get_number(s, "rescale_weight", 1.0, "settings");
      settings.dim = static_cast<int>(settings.thetas.size());
      povm::validate_settings(settings);
      plan.settings.push_back(std::move(settings));
    }
    if (plan.settings.size() != plan.eigenvalues.size()) {
      throw Error(ErrorCode::ValidationError, "plan: settings/eigenvalue count mismatch");
    }
    return plan;
  }
  if (strategy == "spatial") {
    reject_unknown_keys(root,
                        {"compensation", "degenerate", "eigenvalues", "fidelities", "image_plane",
                         "observable", "positions_m", "strategy", "z_m"},
                        "plan");
    planner::SpatialPlan plan;
    plan.degenerate = root.value("degenerate", false);
    plan.observable = qstate::make_observable(parse_matrix(root.at("observable"), "observable"));
    plan.eigenvalues = parse_real_array(root.at("eigenvalues"), "eigenvalues");
    plan.positions = parse_real_array(root.at("positions_m"), "positions_m");
    plan.compensation = parse_real_array(root.at("compensation"), "compensation");
    plan.fidelities = parse_real_array(root.at("fidelities"), "fidelities");
    plan.image_plane = root.value("image_plane", false);
    if (plan.image_plane == root.contains("z_m")) {
      throw Error(ErrorCode::ValidationError, "plan: exactly one of z_m or image_plane expected");
    }
    if (!plan.image_plane) plan.z = root.at("z_m").get<double>();
    return plan;
  }
  throw Error(ErrorCode::ValidationError, "plan: unknown strategy '" + strategy + "'");
}

std::string write_counts_csv(const mc::CountRecord& record, const qstate::Observable& obs) {
  const std::vector<mc::Estimate> probs = mc::estimate_probabilities(record);
  const mc::Estimate expect = mc::estimate_expectation(obs, record);
  std::string out = "outcome,count,shots,seed,p_hat,p_stderr,expectation,expectation_stderr\n";
  for (std::size_t l = 0; l < record.counts.size(); ++l) {
    out += std::to_string(l + 1) + "," + std::to_string(record.counts[l]) + "," +
           std::to_string(record.shots) + "," + std::to_string(record.seed) + "," +
           format_double(probs[l].value) + "," + format_double(probs[l].std_error) + "," +
           format_double(expect.value) + "," + format_double(expect.std_error) + "\n";
  }
  return out;
}

ParsedCounts parse_counts_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "counts: empty document");
  ParsedCounts parsed;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() < 4) throw Error(ErrorCode::ParseError, "counts: malformed row");
    parsed.counts.push_back(std::stoull(fields[1]));
    parsed.shots = std::stoull(fields[2]);
    parsed.seed = std::stoull(fields[3]);
  }
  if (parsed.counts.empty()) throw Error(ErrorCode::ParseError, "counts: no data rows");
  return parsed;
}

std::string write_scan_csv(const std::vector<optics::ScanPoint>& table) {
  std::string out = "x_m,z_m,density_per_m\n";
  for (const auto& p : table) {
    out += format_double(p.x) + "," + format_double(p.z) + "," + format_double(p.density) + "\n";
  }
  return out;
}

std::string write_params_csv(const optics::PlaneParams& params) {
  std::string out = "z_m,eta,Z_m,kappa_per_m,delta\n";
  out += format_double(params.z) + "," + format_double(params.eta) + "," +
         format_double(params.reduced_length) + "," + format_double(params.kappa) + "," +
         format_double(params.delta) + "\n";
  return out;
}

std::string write_measure_csv(const planner::Statistics& stats) {
  std::string header;
  std::string row;
  for (std::size_t l = 0; l < stats.probabilities.size(); ++l) {
    header += "p_" + std::to_string(l + 1) + ",";
    row += format_double(stats.probabilities[l]) + ",";
  }
  header += "expectation\n";
  row += format_double(stats.expectation) + "\n";
  return header + row;
}

namespace {

std::string cvec_json(const CVec& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += pair_json(v[i]);
  }
  out += "]";
  return out;
}

}  // namespace

std::string write_state_json(const optics::PostselectedState& state) {
  std::string out = "{";
  out += "\"amplitudes\":" + cvec_json(state.amplitudes);
  if (state.normalized.size() == 2) {
    const qstate::BlochVector b = optics::bloch_of(state);
    out += ",\"bloch\":{\"phi_rad\":" + format_double(b.phi) +
           ",\"theta_rad\":" + format_double(b.theta) + "}";
  }
  out += std::string(",\"image_plane\":") + (state.image_plane ? "true" : "false");
  if (!state.image_plane) out += ",\"norm2_per_m\":" + format_double(state.norm2);
  out += ",\"normalized\":" + cvec_json(state.normalized);
  out += ",\"x_m\":" + format_double(state.x);
  out += ",\"z_m\":" + format_double(state.z);
  out += "}\n";
  return out;
}

std::string write_tomo_json(const mc::TomographyReport& report, std::uint64_t shots,
                            std::uint64_t seed) {
  const auto est_json = [](const mc::Estimate& e) {
    return "{\"std_error\":" + format_double(e.std_error) +
           ",\"value\":" + format_double(e.value) + "}";
  };
  std::string out = "{";
  out += "\"pauli_estimates\":{\"x\":" + est_json(report.sx) + ",\"y\":" + est_json(report.sy) +
         ",\"z\":" + est_json(report.sz) + "}";
  out += ",\"reconstructed\":" + matrix_json(report.reconstructed.entries);
  out += ",\"seed\":" + std::to_string(seed);
  out += ",\"shots\":" + std::to_string(shots);
  out += ",\"trace_distance\":" + format_double(report.trace_distance);
  out += "}\n";
  return out;
}

qstate::Observable observable_from_name(const std::string& name,
                                        const ExperimentConfig& config) {
  if (name == "sigma_x") return qstate::sigma_x();
  if (name == "sigma_y") return qstate::sigma_y();
  if (name == "sigma_z") return qstate::sigma_z();
  if (name == "config") {
    if (!config.observable) {
      throw Error(ErrorCode::ValidationError,
                  "observable 'config' requested but the config has no observable block");
    }
    return *config.observable;
  }
  throw Error(ErrorCode::ValidationError,
              "unknown observable '" + name + "'; use sigma_x|sigma_y|sigma_z|config");
}

}  // namespace slitsim::io
