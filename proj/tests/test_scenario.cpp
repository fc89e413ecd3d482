#include "doctest.h"

#include <fstream>
#include <sstream>

#include "fiberalign/scenario.hpp"
#include "fiberalign/units.hpp"

using namespace fiberalign;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults") {
  Scenario sc = parse(
      "scenario.kind = align\n"
      "scenario.name = demo\n");
  CHECK(sc.kind == ScenarioKind::align);
  CHECK(sc.name == "demo");
  CHECK(sc.seeds == std::vector<std::uint64_t>{1});
  CHECK(sc.bench.fiber.kind == FiberKind::single_mode);
  CHECK(sc.duration_samples == 425);
  CHECK(sc.climb.stage_schedule == ClimbConfig::fine_profile());
}

TEST_CASE("comments and blank lines are ignored") {
  Scenario sc = parse(
      "# a comment\n"
      "\n"
      "scenario.kind = align\n"
      "   # indented comment\n"
      "scenario.name = demo\n");
  CHECK(sc.name == "demo");
}

TEST_CASE("seed ranges and lists") {
  CHECK(parse("scenario.seeds = 3..6\n").seeds ==
        std::vector<std::uint64_t>{3, 4, 5, 6});
  CHECK(parse("scenario.seeds = 7, 9, 11\n").seeds ==
        std::vector<std::uint64_t>{7, 9, 11});
  CHECK_THROWS_AS(parse("scenario.seeds = 6..3\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("scenario.seeds = 1..200000\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("scenario.seeds = banana\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("scenario.seeds = 1, 1\n"), std::runtime_error);
}

TEST_CASE("unknown keys are named in the error") {
  try {
    parse("bench.lazer_power_mw = 16.2\n");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("bench.lazer_power_mw") !=
          std::string::npos);
  }
}

TEST_CASE("fiber selection and later overrides") {
  Scenario sc = parse("bench.fiber = multi_mode\n");
  CHECK(sc.bench.fiber.kind == FiberKind::multi_mode);
  CHECK(sc.bench.fiber.base_efficiency == doctest::Approx(0.95));
  CHECK(sc.bench.fiber.effective_waist_m == doctest::Approx(0.35e-3));

  Scenario tweaked = parse(
      "bench.fiber = multi_mode\n"
      "bench.base_efficiency = 0.9\n");
  CHECK(tweaked.bench.fiber.base_efficiency == doctest::Approx(0.9));
  CHECK(tweaked.bench.fiber.effective_waist_m == doctest::Approx(0.35e-3));
}

TEST_CASE("actuator gain keys") {
  Scenario both = parse(
      "bench.forward_gain_arcsec = 0.5\n"
      "bench.reverse_ratio = 0.9\n");
  CHECK(both.bench.channel.forward_gain_rad ==
        doctest::Approx(arcsec_to_rad(0.5)).epsilon(1e-12));
  CHECK(both.bench.channel.reverse_gain_rad ==
        doctest::Approx(arcsec_to_rad(0.5) * 0.9).epsilon(1e-12));

  // Ratio alone scales the default forward gain.
  Scenario ratio_only = parse("bench.reverse_ratio = 1.0\n");
  CHECK(ratio_only.bench.channel.reverse_gain_rad ==
        doctest::Approx(arcsec_to_rad(0.35)).epsilon(1e-12));

  // Forward alone keeps the default 0.95 ratio.
  Scenario fwd_only = parse("bench.forward_gain_arcsec = 0.7\n");
  CHECK(fwd_only.bench.channel.reverse_gain_rad ==
        doctest::Approx(arcsec_to_rad(0.7) * 0.95).epsilon(1e-12));
}

TEST_CASE("climb profile and schedule keys") {
  CHECK(parse("climb.profile = coarse\n").climb.stage_schedule ==
        ClimbConfig::coarse_profile());
  CHECK(parse("climb.profile = fine\n").climb.stage_schedule ==
        ClimbConfig::fine_profile());
  CHECK_THROWS_AS(parse("climb.profile = turbo\n"), std::runtime_error);
  CHECK(parse("climb.schedule = 80 40 8\n").climb.stage_schedule ==
        std::vector<int>{80, 40, 8});
  Scenario order = parse("climb.channel_order = 2 4 1 3\n");
  CHECK(order.climb.channel_order == std::array<int, 4>{2, 4, 1, 3});
  CHECK_THROWS_AS(parse("climb.channel_order = 1 2 3\n"), std::runtime_error);
}

TEST_CASE("perturbation events") {
  Scenario sc = parse(
      "perturb.event = 0 70 67\n"
      "perturb.event = 30.5 -2e-5 1e-5 rad\n");
  REQUIRE(sc.perturbations.size() == 2);
  CHECK(sc.perturbations[0].time_s == 0.0);
  CHECK(sc.perturbations[0].dx == 70.0);
  CHECK(sc.perturbations[0].unit == Perturbation::Unit::steps);
  CHECK(sc.perturbations[1].time_s == doctest::Approx(30.5));
  CHECK(sc.perturbations[1].dx == doctest::Approx(-2e-5));
  CHECK(sc.perturbations[1].unit == Perturbation::Unit::radians);
  CHECK_THROWS_AS(parse("perturb.event = 0 1 2 parsecs\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(parse("perturb.event = 0 1\n"), std::runtime_error);
}

TEST_CASE("perturbation unit conversion") {
  Bench::Config bench;  // defaults: 0.35 arcsec forward gain, fold factor 2
  double one_step = arcsec_to_rad(0.35) * 2.0;
  CHECK(perturbation_axis_rad(70.0, Perturbation::Unit::steps, bench) ==
        doctest::Approx(70.0 * one_step).epsilon(1e-12));
  CHECK(perturbation_axis_rad(1e-4, Perturbation::Unit::radians, bench) ==
        doctest::Approx(1e-4));
}

TEST_CASE("validation failures") {
  // Name must stay filesystem-safe; it becomes a directory name.
  CHECK_THROWS_AS(parse("scenario.name = a/b\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("scenario.name = ..\n"), std::runtime_error);
  // Too short to hold the settle reads of one decision.
  CHECK_THROWS_AS(parse("run.duration_samples = 1\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("bench.noise_rel = -0.1\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("fit.points = 2\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("calibrate.moves_per_size = 0\n"), std::runtime_error);
}

TEST_CASE("builtin catalogue") {
  auto names = builtin_scenario_names();
  REQUIRE(names.size() == 7);
  for (const std::string& name : names) {
    Scenario sc = builtin_scenario(name);
    CHECK(sc.name == name);
    CHECK_NOTHROW(sc.validate());
  }
  CHECK_THROWS_AS(builtin_scenario("definitely_not_real"), std::runtime_error);
}

TEST_CASE("builtin smf_fine shape") {
  Scenario sc = builtin_scenario("smf_fine");
  CHECK(sc.kind == ScenarioKind::align);
  CHECK(sc.seeds.size() == 100);
  CHECK(sc.seeds.front() == 1);
  CHECK(sc.seeds.back() == 100);
  CHECK(sc.bench.fiber.kind == FiberKind::single_mode);
  REQUIRE(sc.perturbations.size() == 1);
  CHECK(sc.perturbations[0].dx == 70.0);
  CHECK(sc.perturbations[0].dy == 67.0);
  CHECK(sc.duration_samples == 425);
}

TEST_CASE("builtin variants") {
  Scenario exact = builtin_scenario("smf_fine_exact");
  CHECK(exact.bench.noise.relative_sigma == 0.0);
  CHECK(exact.bench.noise.additive_floor_w == 0.0);
  CHECK(exact.bench.channel.reverse_gain_rad ==
        exact.bench.channel.forward_gain_rad);
  CHECK(exact.random_perturb_max_steps == 80);

  Scenario low = builtin_scenario("smf_fine_lownoise");
  CHECK(low.bench.noise.relative_sigma == doctest::Approx(1e-4));
  CHECK(low.bench.channel.reverse_gain_rad ==
        low.bench.channel.forward_gain_rad);

  Scenario coarse = builtin_scenario("mmf_coarse");
  CHECK(coarse.bench.fiber.kind == FiberKind::multi_mode);
  CHECK(coarse.climb.stage_schedule == ClimbConfig::coarse_profile());

  Scenario jitter = builtin_scenario("jitter_sweep");
  CHECK(jitter.kind == ScenarioKind::jitter_sweep);
  CHECK(jitter.sweep_steps == std::vector<int>{100, 50, 10, 5});
  CHECK_FALSE(jitter.climb.stop_when_converged);
}

TEST_CASE("scenario files mirror the builtin presets") {
  // Runs from the repository root (tests set their working directory there).
  for (const std::string& name : builtin_scenario_names()) {
    CAPTURE(name);
    std::ifstream in("scenarios/" + name + ".cfg");
    REQUIRE_MESSAGE(in.good(), "scenarios/" << name << ".cfg must exist");
    Scenario file = parse_scenario(in);
    Scenario builtin = builtin_scenario(name);
    CHECK(file.kind == builtin.kind);
    CHECK(file.name == builtin.name);
    CHECK(file.seeds == builtin.seeds);
    CHECK(file.duration_samples == builtin.duration_samples);
    CHECK(file.window_start_s == builtin.window_start_s);
    CHECK(file.climb.stage_schedule == builtin.climb.stage_schedule);
    CHECK(file.climb.stop_when_converged == builtin.climb.stop_when_converged);
    CHECK(file.sweep_steps == builtin.sweep_steps);
    CHECK(file.random_perturb_max_steps == builtin.random_perturb_max_steps);
    CHECK(file.bench.fiber.kind == builtin.bench.fiber.kind);
    CHECK(file.bench.noise.relative_sigma == builtin.bench.noise.relative_sigma);
    CHECK(file.bench.channel.reverse_gain_rad ==
          doctest::Approx(builtin.bench.channel.reverse_gain_rad).epsilon(1e-12));
    CHECK(file.calibration.step_sizes == builtin.calibration.step_sizes);
    CHECK(file.fit.points == builtin.fit.points);
    REQUIRE(file.perturbations.size() == builtin.perturbations.size());
    for (std::size_t i = 0; i < file.perturbations.size(); ++i) {
      CHECK(file.perturbations[i].time_s == builtin.perturbations[i].time_s);
      CHECK(file.perturbations[i].dx == builtin.perturbations[i].dx);
      CHECK(file.perturbations[i].dy == builtin.perturbations[i].dy);
    }
  }
}

TEST_CASE("kind names round trip") {
  for (ScenarioKind kind :
       {ScenarioKind::align, ScenarioKind::jitter_sweep,
        ScenarioKind::calibration, ScenarioKind::decay_fit}) {
    CHECK(scenario_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(scenario_kind_from_string("sideways"), std::runtime_error);
}
