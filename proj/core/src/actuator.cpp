#include "fiberalign/actuator.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>

#include "fiberalign/csv.hpp"

namespace fiberalign {

void CalibrationGeometry::validate() const {
  if (!(lever_arm_m > 0.0))
    throw std::invalid_argument("CalibrationGeometry: lever_arm_m must be > 0");
  if (!(fold_factor > 0.0))
    throw std::invalid_argument("CalibrationGeometry: fold_factor must be > 0");
}

void PiezoChannel::Config::validate() const {
  if (channel_id < 1 || channel_id > 4)
    throw std::invalid_argument("PiezoChannel: channel_id must be in 1..4");
  if (!(forward_gain_rad > 0.0) || !(reverse_gain_rad > 0.0))
    throw std::invalid_argument("PiezoChannel: gains must be > 0");
  if (max_steps_per_command < 1)
    throw std::invalid_argument("PiezoChannel: max_steps_per_command must be >= 1");
  if (gain_jitter_rel < 0.0)
    throw std::invalid_argument("PiezoChannel: gain_jitter_rel must be >= 0");
}

PiezoChannel::PiezoChannel(const Config& cfg) : cfg_(cfg), jitter_(cfg.jitter_seed) {
  cfg_.validate();
}

void PiezoChannel::move(int steps) {
  if (std::abs(steps) > cfg_.max_steps_per_command)
    throw std::invalid_argument("PiezoChannel: step command exceeds per-command limit");
  if (steps == 0) return;
  double gain = steps > 0 ? cfg_.forward_gain_rad : cfg_.reverse_gain_rad;
  double sign = steps > 0 ? 1.0 : -1.0;
  int n = std::abs(steps);
  if (cfg_.gain_jitter_rel == 0.0) {
    tilt_rad_ += sign * gain * n;
  } else {
    // Each physical step gets its own gain draw.
    for (int i = 0; i < n; ++i)
      tilt_rad_ += sign * gain * (1.0 + jitter_.next(0.0, cfg_.gain_jitter_rel));
  }
  total_steps_ += steps;
}

void PiezoChannel::set_zero() { zero_reference_ = total_steps_; }

double spot_centroid_displacement(const PiezoChannel& channel,
                                  const CalibrationGeometry& geometry) {
  geometry.validate();
  return geometry.lever_arm_m *
         std::tan(geometry.fold_factor * channel.accumulated_tilt_rad());
}

void write_move_log_csv(const std::vector<MoveRecord>& log, std::ostream& out) {
  out << "seq,channel_id,steps,position_after,tilt_after_rad\n";
  for (const MoveRecord& r : log) {
    out << r.seq << ',' << r.channel_id << ',' << r.steps << ','
        << r.position_after << ',' << csv::format_double(r.tilt_after_rad) << '\n';
  }
}

GainEstimate calibrate_gains(const std::vector<std::pair<int, double>>& move_log,
                             const CalibrationGeometry& geometry) {
  geometry.validate();
  // Fit displacement = k * steps through the origin, separately per direction,
  // then strip the geometric lever out of the slope.
  double sxx_f = 0.0, sxy_f = 0.0;
  double sxx_r = 0.0, sxy_r = 0.0;
  int n_f = 0, n_r = 0;
  for (const auto& [steps, displacement] : move_log) {
    if (steps == 0) continue;
    double s = static_cast<double>(steps);
    if (steps > 0) {
      sxx_f += s * s;
      sxy_f += s * displacement;
      ++n_f;
    } else {
      sxx_r += s * s;
      sxy_r += s * displacement;
      ++n_r;
    }
  }
  if (n_f < 3)
    throw std::invalid_argument(
        "calibrate_gains: need at least 3 forward moves in the log");
  if (n_r < 3)
    throw std::invalid_argument(
        "calibrate_gains: need at least 3 reverse moves in the log");
  double lever = geometry.lever_arm_m * geometry.fold_factor;
  return GainEstimate{sxy_f / sxx_f / lever, sxy_r / sxx_r / lever};
}

}  // namespace fiberalign
