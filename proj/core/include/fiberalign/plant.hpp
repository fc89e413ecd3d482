#pragma once

// Simulated alignment bench: four piezo channels steering two fold mirrors,
// a laser, and a fiber whose coupled power is read by a power meter on a
// fixed sampling clock. Channels 1 and 3 tilt about the x axis, 2 and 4
// about y (configurable); mirror tilts add linearly on each axis and reach
// the beam through the fold factor.

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "fiberalign/actuator.hpp"
#include "fiberalign/optics.hpp"
#include "fiberalign/random.hpp"
#include "fiberalign/sample.hpp"

namespace fiberalign {

enum class FiberKind { single_mode, multi_mode };

// Receiving fiber, reduced to the two numbers the coupling law needs. The
// effective waist sets the angular e-folding scale lambda / (pi * w): the
// multimode fiber's wide acceptance shows up here as a *smaller* effective
// waist, i.e. a slower rolloff with angle, together with a higher ceiling.
struct FiberConfig {
  FiberKind kind = FiberKind::single_mode;
  double effective_waist_m = 1.625e-3;
  double base_efficiency = 0.8;

  static FiberConfig single_mode_default();
  static FiberConfig multi_mode_default();

  void validate() const;  // throws std::invalid_argument
};

// Multiplicative relative noise plus an additive detector floor, both
// Gaussian. Readings clamp at zero.
struct NoiseModel {
  double relative_sigma = 0.005;
  double additive_floor_w = 1e-7;

  void validate() const;  // throws std::invalid_argument
};

enum class Axis { x, y };

// Which tilt axis each of the four channels drives.
struct AxisMap {
  std::array<Axis, 4> axis_of = {Axis::x, Axis::y, Axis::x, Axis::y};

  Axis axis(int channel_id) const { return axis_of.at(channel_id - 1); }
};

// Read-only power feed for the controller.
class PowerSource {
 public:
  virtual ~PowerSource() = default;
  virtual PowerSample read() = 0;
};

// Actuation commands the controller may issue. No optical state leaks
// through this interface; feedback happens via PowerSource alone.
class ActuatorBus {
 public:
  virtual ~ActuatorBus() = default;
  virtual void move(int channel_id, int steps) = 0;
  virtual void set_zero(int channel_id) = 0;
  virtual long long position(int channel_id) const = 0;
};

class Bench : public PowerSource, public ActuatorBus {
 public:
  struct Config {
    double laser_power_w = 16.2e-3;
    double wavelength_m = 780e-9;
    double sample_period_s = 0.2;
    FiberConfig fiber = FiberConfig::single_mode_default();
    NoiseModel noise{};
    PiezoChannel::Config channel{};  // template; channel_id is set per channel
    AxisMap axis_map{};
    CalibrationGeometry geometry{};
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws std::invalid_argument
  };

  explicit Bench(const Config& cfg);

  // Beam angular offset (x, y) from the perfectly coupled axis: the sum of
  // per-channel mirror tilts, folded, plus any injected perturbation.
  std::pair<double, double> angular_offset_rad() const;

  // Coupling law for the installed fiber.
  CouplingModel coupling() const;

  // Draws one power reading and advances the simulated clock. Draw order is
  // relative noise first, then the additive floor, so traces are reproducible
  // from the seed alone.
  PowerSample read() override;

  void move(int channel_id, int steps) override;
  void set_zero(int channel_id) override;
  long long position(int channel_id) const override;

  // Adds a pure beam-angle offset, e.g. a bumped mount. No actuator state
  // changes.
  void inject_perturbation(double dx_rad, double dy_rad);

  // Replaces the receiving fiber; alignment and clock carry over.
  void swap_fiber(const FiberConfig& fiber);

  // Simulated time; exactly reads-so-far * sample_period.
  double clock_s() const { return static_cast<double>(reads_) * cfg_.sample_period_s; }
  long long reads() const { return reads_; }

  const std::vector<PowerSample>& sample_log() const { return sample_log_; }
  const std::vector<MoveRecord>& move_log() const { return move_log_; }
  const Config& config() const { return cfg_; }
  const PiezoChannel& channel(int channel_id) const;

 private:
  PiezoChannel& channel_ref(int channel_id);

  Config cfg_;
  std::vector<PiezoChannel> channels_;
  double perturb_x_rad_ = 0.0;
  double perturb_y_rad_ = 0.0;
  long long reads_ = 0;
  NormalSampler noise_;
  std::vector<PowerSample> sample_log_;
  std::vector<MoveRecord> move_log_;
};

// PowerSource over a plain-text file whose last non-empty line is a decimal
// watts value; the file is re-read on every sample. Mirrors the hand-off file
// some lab power meters write.
class FilePowerSource : public PowerSource {
 public:
  explicit FilePowerSource(std::filesystem::path path, double sample_period_s = 0.2);

  PowerSample read() override;

 private:
  double read_file_watts();

  std::filesystem::path path_;
  double sample_period_s_;
  long long reads_ = 0;
};

}  // namespace fiberalign
