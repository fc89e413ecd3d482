#pragma once

// Batch execution: one seeded run per scenario seed, with the artifact layout
//
//   <out>/<scenario>/summary.jsonl            one line per seed
//   <out>/<scenario>/<seed>/run.csv           controller log, streamed
//   <out>/<scenario>/<seed>/trace.csv         every power reading
//   <out>/<scenario>/<seed>/move_log.csv      every actuator command
//   <out>/<scenario>/<seed>/analysis.jsonl    derived metrics
//   <out>/<scenario>/<seed>/meta.txt          wall-clock sidecar
//
// jitter_sweep nests one run per step size under step<N>/ inside the seed
// directory; calibration and decay_fit write moves.csv / points.csv instead
// of the run artifacts. Everything except meta.txt is byte-stable for a
// given build and seed.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fiberalign/actuator.hpp"
#include "fiberalign/analysis.hpp"
#include "fiberalign/controller.hpp"
#include "fiberalign/scenario.hpp"

namespace fiberalign {

struct AlignmentOutcome {
  std::uint64_t seed = 0;
  std::vector<PowerSample> trace;
  std::vector<ClimbRecord> climb_log;
  std::vector<MoveRecord> move_log;
  TerminationReason reason = TerminationReason::sample_budget;
  double perturb_x_rad = 0.0;  // total injected offset over the whole run
  double perturb_y_rad = 0.0;
  double final_theta_rad = 0.0;
  std::array<long long, 4> final_positions = {0, 0, 0, 0};
};

// One alignment run, exactly sc.duration_samples power readings. When a sink
// is given the controller log streams to it row by row. Requires an align
// scenario.
AlignmentOutcome run_alignment(const Scenario& sc, std::uint64_t seed,
                               std::ostream* run_csv_sink = nullptr);

struct SweepPoint {
  int step_size = 0;
  AlignmentOutcome outcome;
  StablePhaseStats window{};
};

struct JitterOutcome {
  std::uint64_t seed = 0;
  std::vector<SweepPoint> points;
  // True when the settled-window relative sd strictly decreases across the
  // sweep in listed order.
  bool monotone_decreasing = false;
};

JitterOutcome run_jitter_sweep(const Scenario& sc, std::uint64_t seed);

struct CalibrationOutcome {
  std::uint64_t seed = 0;
  std::vector<std::pair<int, double>> moves;  // commanded steps, measured ds
  GainEstimate estimate{};
  double forward_rel_err = 0.0;  // against the configured true gains
  double reverse_rel_err = 0.0;
};

CalibrationOutcome run_calibration(const Scenario& sc, std::uint64_t seed);

struct FitOutcome {
  std::uint64_t seed = 0;
  std::vector<std::pair<double, double>> points;  // angle rad, efficiency
  DecayFit fit{};
  double base_efficiency_err = 0.0;
};

FitOutcome run_decay_fit(const Scenario& sc, std::uint64_t seed);

// Start-of-run offset (steps per axis) drawn from the seed when the scenario
// enables random perturbations; {0, 0} otherwise.
std::pair<int, int> random_perturb_steps(const Scenario& sc, std::uint64_t seed);

// Runs all seeds and writes the artifact tree. One progress line per seed
// goes to `log`. Returns the number of seeds run.
int run_scenario_to_dir(const Scenario& sc, const std::string& out_dir,
                        std::ostream& log);

}  // namespace fiberalign
