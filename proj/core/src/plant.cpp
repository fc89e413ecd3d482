#include "fiberalign/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace fiberalign {

FiberConfig FiberConfig::single_mode_default() {
  return FiberConfig{FiberKind::single_mode, 1.625e-3, 0.8};
}

FiberConfig FiberConfig::multi_mode_default() {
  // Effective waist chosen so the multimode rolloff is still above 95% of its
  // ceiling at the single-mode fiber's e-folding angle; ceiling set by the
  // lower mode-matching loss of a large-core fiber.
  return FiberConfig{FiberKind::multi_mode, 0.35e-3, 0.95};
}

void FiberConfig::validate() const {
  if (!(effective_waist_m > 0.0))
    throw std::invalid_argument("FiberConfig: effective_waist_m must be > 0");
  if (!(base_efficiency > 0.0) || base_efficiency > 1.0)
    throw std::invalid_argument("FiberConfig: base_efficiency must be in (0, 1]");
}

void NoiseModel::validate() const {
  if (relative_sigma < 0.0)
    throw std::invalid_argument("NoiseModel: relative_sigma must be >= 0");
  if (additive_floor_w < 0.0)
    throw std::invalid_argument("NoiseModel: additive_floor_w must be >= 0");
}

void Bench::Config::validate() const {
  if (!(laser_power_w > 0.0))
    throw std::invalid_argument("Bench: laser_power_w must be > 0");
  if (!(wavelength_m > 0.0))
    throw std::invalid_argument("Bench: wavelength_m must be > 0");
  if (!(sample_period_s > 0.0))
    throw std::invalid_argument("Bench: sample_period_s must be > 0");
  fiber.validate();
  noise.validate();
  channel.validate();
  geometry.validate();
}

Bench::Bench(const Config& cfg)
    : cfg_(cfg), noise_(0) {
  cfg_.validate();
  // Independent derived streams: one for the power meter, one per channel's
  // step jitter.
  std::uint64_t chain = cfg_.rng_seed;
  noise_ = NormalSampler(splitmix64(chain));
  channels_.reserve(4);
  for (int id = 1; id <= 4; ++id) {
    PiezoChannel::Config ch = cfg_.channel;
    ch.channel_id = id;
    ch.jitter_seed = splitmix64(chain);
    channels_.emplace_back(ch);
  }
}

PiezoChannel& Bench::channel_ref(int channel_id) {
  if (channel_id < 1 || channel_id > 4)
    throw std::invalid_argument("Bench: channel_id must be in 1..4");
  return channels_[channel_id - 1];
}

const PiezoChannel& Bench::channel(int channel_id) const {
  if (channel_id < 1 || channel_id > 4)
    throw std::invalid_argument("Bench: channel_id must be in 1..4");
  return channels_[channel_id - 1];
}

std::pair<double, double> Bench::angular_offset_rad() const {
  double x = perturb_x_rad_;
  double y = perturb_y_rad_;
  for (const PiezoChannel& ch : channels_) {
    double beam_tilt = cfg_.geometry.fold_factor * ch.accumulated_tilt_rad();
    if (cfg_.axis_map.axis(ch.id()) == Axis::x)
      x += beam_tilt;
    else
      y += beam_tilt;
  }
  return {x, y};
}

CouplingModel Bench::coupling() const {
  return CouplingModel{cfg_.fiber.base_efficiency, cfg_.fiber.effective_waist_m,
                       cfg_.wavelength_m};
}

PowerSample Bench::read() {
  auto [ox, oy] = angular_offset_rad();
  double theta = std::hypot(ox, oy);
  double power = cfg_.laser_power_w * angular_efficiency(coupling(), theta);
  if (cfg_.noise.relative_sigma > 0.0)
    power *= 1.0 + noise_.next(0.0, cfg_.noise.relative_sigma);
  if (cfg_.noise.additive_floor_w > 0.0)
    power += noise_.next(0.0, cfg_.noise.additive_floor_w);
  power = std::max(power, 0.0);
  ++reads_;
  PowerSample s{clock_s(), power};
  sample_log_.push_back(s);
  return s;
}

void Bench::move(int channel_id, int steps) {
  PiezoChannel& ch = channel_ref(channel_id);
  ch.move(steps);
  move_log_.push_back(MoveRecord{static_cast<int>(move_log_.size()) + 1, channel_id,
                                 steps, ch.position(), ch.accumulated_tilt_rad()});
}

void Bench::set_zero(int channel_id) { channel_ref(channel_id).set_zero(); }

long long Bench::position(int channel_id) const { return channel(channel_id).position(); }

void Bench::inject_perturbation(double dx_rad, double dy_rad) {
  if (!std::isfinite(dx_rad) || !std::isfinite(dy_rad))
    throw std::invalid_argument("Bench: perturbation must be finite");
  perturb_x_rad_ += dx_rad;
  perturb_y_rad_ += dy_rad;
}

void Bench::swap_fiber(const FiberConfig& fiber) {
  fiber.validate();
  cfg_.fiber = fiber;
}

FilePowerSource::FilePowerSource(std::filesystem::path path, double sample_period_s)
    : path_(std::move(path)), sample_period_s_(sample_period_s) {
  if (!(sample_period_s_ > 0.0))
    throw std::invalid_argument("FilePowerSource: sample_period_s must be > 0");
  // Fail at construction, not on the first control step.
  read_file_watts();
  reads_ = 0;
}

double FilePowerSource::read_file_watts() {
  std::ifstream in(path_);
  if (!in)
    throw std::runtime_error("FilePowerSource: cannot open " + path_.string());
  std::string line, last;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) last = line;
  }
  if (last.empty())
    throw std::runtime_error("FilePowerSource: no value in " + path_.string());
  std::istringstream parse(last);
  double watts = 0.0;
  if (!(parse >> watts) || !std::isfinite(watts))
    throw std::runtime_error("FilePowerSource: bad power value in " + path_.string());
  return watts;
}

PowerSample FilePowerSource::read() {
  double watts = read_file_watts();
  ++reads_;
  return PowerSample{static_cast<double>(reads_) * sample_period_s_, watts};
}

}  // namespace fiberalign
