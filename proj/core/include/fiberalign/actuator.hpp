#pragma once

// Stepper-driven piezo mirror channel. Commands are integer step counts; the
// per-step tilt gain differs between travel directions (a constant-asymmetry
// stand-in for drive hysteresis), so a +N / -N excursion does not return the
// mirror exactly to its starting tilt unless the gains match.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fiberalign/random.hpp"
#include "fiberalign/units.hpp"

namespace fiberalign {

// Mirror-to-target geometry for converting tilt into spot motion.
struct CalibrationGeometry {
  double lever_arm_m = 0.085;  // mirror to fiber-collimator distance
  double fold_factor = 2.0;    // reflected-beam deflection per unit mirror tilt

  void validate() const;  // throws std::invalid_argument
};

class PiezoChannel {
 public:
  struct Config {
    int channel_id = 1;  // 1..4
    double forward_gain_rad = arcsec_to_rad(0.35);
    // Reverse travel is slightly weaker by default; set equal to
    // forward_gain_rad for an ideal symmetric drive.
    double reverse_gain_rad = arcsec_to_rad(0.35) * 0.95;
    int max_steps_per_command = 1000;
    // Optional zero-mean Gaussian jitter on each individual step's gain,
    // relative to the nominal gain. Off by default.
    double gain_jitter_rel = 0.0;
    std::uint64_t jitter_seed = 0;

    void validate() const;  // throws std::invalid_argument
  };

  explicit PiezoChannel(const Config& cfg);

  // Applies a signed step command. Rejects |steps| above the per-command
  // limit without changing any state.
  void move(int steps);

  // Re-references the position readout to zero. Pure bookkeeping: the
  // physical tilt is untouched.
  void set_zero();

  // Signed step count since the last set_zero().
  long long position() const { return total_steps_ - zero_reference_; }

  // Physical mirror tilt accumulated since construction.
  double accumulated_tilt_rad() const { return tilt_rad_; }

  int id() const { return cfg_.channel_id; }
  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  long long total_steps_ = 0;
  long long zero_reference_ = 0;
  double tilt_rad_ = 0.0;
  NormalSampler jitter_;
};

// Spot displacement on a target a lever arm away:
//   d = lever_arm * tan(fold_factor * tilt).
double spot_centroid_displacement(const PiezoChannel& channel,
                                  const CalibrationGeometry& geometry);

// One commanded move, as exported to the command log.
struct MoveRecord {
  int seq = 0;
  int channel_id = 0;
  int steps = 0;
  long long position_after = 0;
  double tilt_after_rad = 0.0;
};

void write_move_log_csv(const std::vector<MoveRecord>& log, std::ostream& out);

struct GainEstimate {
  double forward_gain_rad = 0.0;
  double reverse_gain_rad = 0.0;
};

// Per-direction least-squares gain recovery from a list of
// (commanded steps, measured spot displacement change) pairs. Displacements
// are fitted against lever_arm * fold_factor * gain * steps, so the log must
// stay inside the small-angle regime. Needs at least 3 moves per direction.
GainEstimate calibrate_gains(const std::vector<std::pair<int, double>>& move_log,
                             const CalibrationGeometry& geometry);

}  // namespace fiberalign
