#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "slitsim/error.hpp"
#include "slitsim/io.hpp"
#include "slitsim/rng.hpp"
#include "test_util.hpp"

using namespace slitsim;
using namespace slitsim::io;

TEST_CASE("a minimal config gets the documented defaults") {
  const ExperimentConfig c = parse_config(R"({"state":{"rows":[[0.5,0],[0,0.5]]}})");
  CHECK(c.geometry.slit_count == 2);
  CHECK(c.geometry.slit_half_width == doctest::Approx(10e-6));
  CHECK(c.geometry.slit_separation == doctest::Approx(80e-6));
  CHECK(c.geometry.wavelength == doctest::Approx(800e-9));
  CHECK(c.geometry.focal_length == doctest::Approx(0.3));
  CHECK(c.detector.efficiency == 1.0);
  CHECK(c.detector.pinhole_halfwidth == doctest::Approx(1e-6));
  CHECK(c.seed == 0);
  CHECK_FALSE(c.rescale);
  // entries written as plain numbers parse with zero imaginary part
  CHECK(c.state.entries(0, 0) == Complex(0.5, 0.0));
}

TEST_CASE("an empty config object is the all-defaults experiment") {
  const ExperimentConfig c = parse_config("{}");
  CHECK(c.state.entries(0, 0).real() == doctest::Approx(0.5));
  CHECK(c.state.entries(0, 1) == Complex(0, 0));
}

TEST_CASE("state entries accept [re, im] pairs") {
  const ExperimentConfig c = parse_config(
      R"({"state":{"rows":[[0.5,[0,-0.5]],[[0,0.5],0.5]]}})");
  CHECK(c.state.entries(0, 1) == Complex(0.0, -0.5));
  CHECK(c.state.entries(1, 0) == Complex(0.0, 0.5));
}

TEST_CASE("overlapping slits are rejected by name") {
  try {
    parse_config(R"({"geometry":{"a_m":5e-05,"d_m":8e-05}})");
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(std::string(e.message()).find("slit overlap") != std::string::npos);
  }
}

TEST_CASE("unknown keys and malformed JSON are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"stat":{"rows":[[1,0],[0,0]]}})"), Error);
  try {
    parse_config("{\"state\":");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
  CHECK_THROWS_AS(parse_config(R"({"seed":-1})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"state":{"rows":[[1,0,0],[0,0,0]]}})"), Error);
}

TEST_CASE("the canonical config form is a fixed point of parse/write") {
  const std::string messy = R"({
    "seed": 9,
    "state": { "rows": [[0.5, [0, -0.25]], [[0, 0.25], 0.5]] },
    "rescale": true,
    "detector": { "shots": 4096 }
  })";
  const std::string once = write_config(parse_config(messy));
  const std::string twice = write_config(parse_config(once));
  CHECK(once == twice);
  CHECK(once.find("\"detector\"") < once.find("\"geometry\""));
  CHECK(once.back() == '\n');
}

TEST_CASE("plan files round trip to the same in-memory plan") {
  const ExperimentConfig base = default_config();
  const optics::OpticalGeometry geom = base.geometry;

  const planner::PovmPlan povm_plan =
      planner::plan_povm(qstate::sigma_y(), geom, true);
  const mc::Plan round = parse_plan(write_plan(povm_plan));
  const auto& p = std::get<planner::PovmPlan>(round);
  CHECK(p.eigenvalues == povm_plan.eigenvalues);
  CHECK(p.detection_z == povm_plan.detection_z);
  REQUIRE(p.settings.size() == povm_plan.settings.size());
  for (std::size_t l = 0; l < p.settings.size(); ++l) {
    CHECK(p.settings[l].thetas == povm_plan.settings[l].thetas);
    CHECK(p.settings[l].phis == povm_plan.settings[l].phis);
    CHECK(p.settings[l].rescale_weight == povm_plan.settings[l].rescale_weight);
  }
  CHECK((p.observable.entries - povm_plan.observable.entries).max_abs() == 0.0);

  const planner::SpatialPlan focal = planner::plan_spatial(qstate::sigma_x(), geom);
  const mc::Plan focal_round = parse_plan(write_plan(focal));
  const auto& s = std::get<planner::SpatialPlan>(focal_round);
  CHECK_FALSE(s.image_plane);
  CHECK(s.z == focal.z);
  CHECK(s.positions == focal.positions);
  CHECK(s.compensation == focal.compensation);
  CHECK(s.fidelities == focal.fidelities);

  const planner::SpatialPlan image = planner::plan_spatial(qstate::sigma_z(), geom);
  const std::string text = write_plan(image);
  CHECK(text.find("\"image_plane\":true") != std::string::npos);
  CHECK(text.find("\"z_m\"") == std::string::npos);
  const mc::Plan image_round = parse_plan(text);
  const auto& i = std::get<planner::SpatialPlan>(image_round);
  CHECK(i.image_plane);
  CHECK(i.positions == image.positions);
}

TEST_CASE("counts CSV carries the record and re-parses") {
  const ExperimentConfig base = default_config();
  const mc::Plan plan = planner::plan_povm(qstate::sigma_x(), base.geometry);
  mc::DetectorModel model;
  model.pinhole_halfwidth = 1e-3;
  model.shots = 5000;
  const mc::CountRecord rec =
      mc::simulate_counts(base.state, plan, base.geometry, model, 99);
  const std::string csv = write_counts_csv(rec, qstate::sigma_x());
  CHECK(csv.rfind("outcome,count,shots,seed,p_hat,p_stderr,expectation,expectation_stderr\n",
                  0) == 0);
  const ParsedCounts parsed = parse_counts_csv(csv);
  CHECK(parsed.counts == rec.counts);
  CHECK(parsed.shots == rec.shots);
  CHECK(parsed.seed == rec.seed);
}

TEST_CASE("format_double writes the shortest exact form") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, int(rng.uniform() * 40) - 20);
    const std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("plane-parameter CSV spells out the focal-plane infinity") {
  const ExperimentConfig base = default_config();
  const std::string csv =
      write_params_csv(optics::plane_params(base.geometry, base.geometry.focal_length));
  CHECK(csv.rfind("z_m,eta,Z_m,kappa_per_m,delta\n", 0) == 0);
  CHECK(csv.find(",inf,") != std::string::npos);
}

TEST_CASE("measure CSV has one probability column per outcome") {
  planner::Statistics st;
  st.probabilities = {1.0, 0.0};
  st.expectation = 1.0;
  CHECK(write_measure_csv(st) == "p_1,p_2,expectation\n1,0,1\n");
}

TEST_CASE("state JSON reports Bloch angles for qubits") {
  const ExperimentConfig base = default_config();
  const std::string text =
      write_state_json(optics::postselected_state(base.geometry, 0.0, base.geometry.focal_length));
  CHECK(text.find("\"bloch\"") != std::string::npos);
  CHECK(text.find("\"theta_rad\"") != std::string::npos);
  CHECK(text.find("\"norm2_per_m\"") != std::string::npos);
}

TEST_CASE("named observables resolve, config observables validate") {
  const ExperimentConfig base = default_config();
  CHECK(observable_from_name("sigma_y", base).entries(0, 1) == Complex(0, -1));
  CHECK_THROWS_AS(observable_from_name("sigma_q", base), Error);
  CHECK_THROWS_AS(observable_from_name("config", base), Error);

  const ExperimentConfig with_obs = parse_config(
      R"({"observable":{"rows":[[1,0],[0,-1]]}})");
  CHECK(observable_from_name("config", with_obs).entries(0, 0) == Complex(1, 0));
  CHECK_THROWS_AS(parse_config(R"({"observable":{"rows":[[1,[0,1]],[[0,1],0]]}})"), Error);
}
