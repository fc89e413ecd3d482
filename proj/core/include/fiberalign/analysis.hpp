#pragma once

// Offline metrics over recorded power traces. Everything here is pure: traces
// go in, numbers come out, nothing touches the bench.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fiberalign/optics.hpp"
#include "fiberalign/sample.hpp"

namespace fiberalign {

struct RunTrace {
  std::vector<PowerSample> samples;  // time-ordered
  double laser_power_w = 16.2e-3;    // input power the efficiency is taken against
};

// Power normalized by the laser input, per sample.
std::vector<std::pair<double, double>> efficiency_trace(const RunTrace& trace);

// Time of the first sample at or above the threshold that is sustained for at
// least `sustain` consecutive samples; nullopt if never reached.
std::optional<double> time_to_threshold(const RunTrace& trace, double threshold,
                                        int sustain = 3);

struct StablePhaseStats {
  int sample_count = 0;
  double mean_w = 0.0;
  double sd_w = 0.0;         // sample standard deviation
  double relative_sd = 0.0;  // sd / mean
  // Samples more than 3 sd below the window mean; deep dips from probing past
  // the optimum.
  int overshoot_count = 0;
};

// Stats over all samples at or after window_start_s. The window must contain
// at least 20 samples to say anything about stability.
StablePhaseStats stable_phase_stats(const RunTrace& trace, double window_start_s);

// First time the trailing `window` samples have relative sd below the limit.
std::optional<double> first_stable_time(const RunTrace& trace, int window,
                                        double rel_sd_limit);

struct DecayFit {
  double base_efficiency = 0.0;
  double residual_norm = 0.0;
};

// Least-squares fit of eta(theta) = T * exp(-(pi * w * theta / lambda)^2) to
// measured (theta, efficiency) points. Waist and wavelength are fixed by the
// bench, so only the ceiling T is free and the fit is linear in it.
DecayFit fit_decay_model(const std::vector<std::pair<double, double>>& theta_eff,
                         double waist_radius_m, double wavelength_m);

struct AngleTrajectory {
  std::vector<std::pair<double, double>> points;  // (time, |theta|)
  int skipped = 0;  // non-positive readings dropped from the trajectory
};

// Pointwise inversion of the coupling law over a trace. Readings above the
// model ceiling (noise) clamp to zero angle; readings at or below zero are
// skipped and counted.
AngleTrajectory angle_trajectory(const RunTrace& trace, const CouplingModel& model);

// Two-column CSV helpers shared by the harness and the CLI.
void write_trace_csv(const std::vector<PowerSample>& samples, std::ostream& out);
void write_pairs_csv(const std::vector<std::pair<double, double>>& rows,
                     const std::string& header, std::ostream& out);

// Reads any CSV with time_s and power_w columns (a bare trace or a full
// controller log) back into a trace.
std::vector<PowerSample> read_trace_csv(std::istream& in);

}  // namespace fiberalign
