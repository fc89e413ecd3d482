#pragma once

// Power-feedback hill climber over four actuator channels.
//
// The controller never sees the optical state; it only reads the power meter
// and issues step commands. Channels are visited round-robin. On each visit a
// channel performs a local search at the current stage's step size: keep
// stepping while each new reading beats the reference (dP > 0), and on the
// first non-improving reading step once back, flip that channel's preferred
// direction, and hand over to the next channel (dP = 0 counts as no gain, so
// noise-flat plateaus terminate). The reading taken after the step back
// becomes the new reference, which keeps a lucky high reading from acting as
// an unbeatable baseline for the rest of the run.
//
// Stages walk a descending step-size schedule with deliberate re-exploration
// (e.g. 100, 50, 100, 50, 10); after the last stage the controller keeps
// re-running it. The run ends once every channel has failed to gain in both
// directions at the final step size (all at the final stage, with no gain in
// between), or when the adjustment budget is exhausted.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiberalign/plant.hpp"
#include "fiberalign/sample.hpp"

namespace fiberalign {

struct ClimbConfig {
  std::vector<int> stage_schedule = {10, 5, 10, 5, 1};
  int max_adjustments = 2000;
  std::array<int, 4> channel_order = {1, 2, 3, 4};
  // Readings averaged per decision; raw samples still reach the bench log.
  int settle_reads = 1;
  // Operational "stable" declaration used by the analysis layer: relative
  // standard deviation of the trailing window below this fraction.
  int stability_window = 50;
  double stability_rel_sd = 0.02;
  // When false the controller never declares convergence and keeps probing
  // at the final step size until the adjustment budget runs out; useful for
  // measuring steady-state jitter at a fixed step size.
  bool stop_when_converged = true;

  static std::vector<int> fine_profile() { return {10, 5, 10, 5, 1}; }
  static std::vector<int> coarse_profile() { return {100, 50, 100, 50, 10}; }

  void validate() const;  // throws std::invalid_argument
};

enum class ClimbEvent { move, reverse, stage_advance, terminate };

const char* to_string(ClimbEvent ev);
ClimbEvent climb_event_from_string(const std::string& name);

// One power reading and the command issued in response to it.
struct ClimbRecord {
  double time_s = 0.0;
  int channel = 0;
  long long position_steps = 0;
  double power_w = 0.0;
  int stage = 0;
  ClimbEvent event = ClimbEvent::move;
};

enum class TerminationReason { max_adjustments, no_further_gain, sample_budget };

const char* to_string(TerminationReason reason);

struct ClimbState {
  int current_channel = 0;
  int direction = 0;  // preferred direction of the current channel
  int stage = 0;
  int step_size = 0;
  double p_old = 0.0;
  double p_new = 0.0;
  std::array<bool, 4> move_done = {false, false, false, false};
  int cycles = 0;
  int adjustments = 0;
};

struct RunResult {
  TerminationReason reason = TerminationReason::max_adjustments;
  ClimbState final_state;
};

class HillClimber {
 public:
  HillClimber(const ClimbConfig& cfg, PowerSource& source, ActuatorBus& bus);

  // Zeroes the channel readouts, takes the reference reading, and issues the
  // first probe move. Throws std::runtime_error if the source is unreadable
  // or returns a non-finite power.
  void initialize();

  // Processes one reading (plus the command it triggers). Returns false once
  // the run has terminated.
  bool tick();

  // Emits the closing record (one further reading) and marks the run done.
  // Called internally for budget/convergence exits; the harness calls it to
  // cut a run at a sample budget.
  void finalize(TerminationReason reason);

  // initialize() + tick() to completion.
  RunResult run();

  bool initialized() const { return initialized_; }
  bool terminated() const { return terminated_; }
  TerminationReason reason() const { return reason_; }
  ClimbState state() const;
  const std::vector<ClimbRecord>& log() const { return log_; }
  const std::array<int, 4>& directions() const { return dirs_; }

  // Optional incremental CSV sink; header is written on initialize and each
  // record is flushed as it is produced, so an aborted run leaves a valid
  // partial log behind.
  void set_csv_sink(std::ostream* sink) { sink_ = sink; }

 private:
  PowerSample read_averaged();
  void issue_probe();
  void advance_stage();
  void emit(double time_s, int channel, double power_w, ClimbEvent ev);
  bool at_final_stage() const { return stage_ + 1 == static_cast<int>(cfg_.stage_schedule.size()); }
  int current_channel() const { return cfg_.channel_order[order_idx_]; }
  int dir_of(int channel) const { return dirs_[channel - 1]; }
  bool all_directions_exhausted() const;

  ClimbConfig cfg_;
  PowerSource& source_;
  ActuatorBus& bus_;

  bool initialized_ = false;
  bool terminated_ = false;
  TerminationReason reason_ = TerminationReason::max_adjustments;

  enum class Phase { probe, rebase };
  Phase phase_ = Phase::probe;

  int stage_ = 0;
  int order_idx_ = 0;
  std::array<int, 4> dirs_ = {1, 1, 1, 1};
  std::array<bool, 4> move_done_ = {false, false, false, false};
  // Final-stage bookkeeping for the no-further-gain exit: which probe
  // directions have failed since the last gain.
  std::array<bool, 4> fail_plus_ = {false, false, false, false};
  std::array<bool, 4> fail_minus_ = {false, false, false, false};

  double p_old_ = 0.0;
  double p_new_ = 0.0;
  int cycles_ = 0;
  int adjustments_ = 0;

  std::vector<ClimbRecord> log_;
  std::ostream* sink_ = nullptr;
};

void write_climb_log_csv(const std::vector<ClimbRecord>& log, std::ostream& out);
std::vector<ClimbRecord> read_climb_log_csv(std::istream& in);

}  // namespace fiberalign
