#pragma once

// A scenario bundles everything one reproducible batch needs: bench setup,
// climb settings, perturbations, duration, and the seed list. Scenarios come
// either from the built-in presets or from a small key-value text format
// (see parse_scenario).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fiberalign/controller.hpp"
#include "fiberalign/plant.hpp"

namespace fiberalign {

enum class ScenarioKind { align, jitter_sweep, calibration, decay_fit };

const char* to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

// A beam disturbance applied at a given simulated time. Values are per axis,
// either in raw beam radians or in equivalent actuator steps (forward gain
// times fold factor per step).
struct Perturbation {
  enum class Unit { steps, radians };

  double time_s = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  Unit unit = Unit::steps;
};

// Converts one perturbation axis value to beam radians for the given bench.
double perturbation_axis_rad(double value, Perturbation::Unit unit,
                             const Bench::Config& bench);

// Repeated move plan for gain calibration runs.
struct CalibrationPlan {
  std::vector<int> step_sizes = {10, 100, 200, 300, 400, 500};
  int moves_per_size = 10;          // per size, alternating +s / -s
  double measurement_noise_m = 5e-7;  // centroid readout noise, per reading

  void validate() const;  // throws std::invalid_argument
};

// Synthetic angle/efficiency data set for decay-model fitting runs.
struct FitPlan {
  int points = 41;
  double theta_max_rad = 3e-4;
  double noise_rel = 0.01;  // relative Gaussian noise on each efficiency

  void validate() const;  // throws std::invalid_argument
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::align;
  std::string name = "scenario";
  std::vector<std::uint64_t> seeds = {1};

  Bench::Config bench{};
  ClimbConfig climb{};

  // Applied in time order; entries at t = 0 land before the first reading.
  std::vector<Perturbation> perturbations;

  // When > 0, each seed also gets a start-of-run offset drawn uniformly from
  // the integer step lattice [-max, max] on both axes.
  int random_perturb_max_steps = 0;

  // jitter_sweep only: one full run per entry, each pinned to a single-step
  // schedule of that size.
  std::vector<int> sweep_steps = {100, 50, 10, 5};

  int duration_samples = 425;    // total power readings per run
  double window_start_s = 65.0;  // start of the settled-phase statistics window

  CalibrationPlan calibration{};
  FitPlan fit{};

  void validate() const;  // throws std::invalid_argument
};

// Parses the scenario text format:
//
//   # comment
//   scenario.kind = align
//   scenario.seeds = 1..100
//   bench.fiber = single_mode
//   climb.profile = fine
//   perturb.event = 0 70 67 steps
//
// Unknown keys and malformed values throw std::runtime_error naming the key.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario_file(const std::string& path);

// Built-in presets: smf_fine, mmf_coarse, jitter_sweep, calibration,
// decay_fit, smf_fine_exact, smf_fine_lownoise. Throws std::runtime_error for
// unknown names.
Scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

}  // namespace fiberalign
