#include "fiberalign/controller.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "fiberalign/csv.hpp"

namespace fiberalign {

void ClimbConfig::validate() const {
  if (stage_schedule.empty())
    throw std::invalid_argument("ClimbConfig: stage_schedule must not be empty");
  for (int s : stage_schedule)
    if (s < 1) throw std::invalid_argument("ClimbConfig: step sizes must be >= 1");
  if (max_adjustments < 1)
    throw std::invalid_argument("ClimbConfig: max_adjustments must be >= 1");
  std::array<bool, 4> seen = {false, false, false, false};
  for (int c : channel_order) {
    if (c < 1 || c > 4)
      throw std::invalid_argument("ClimbConfig: channel_order entries must be in 1..4");
    if (seen[c - 1])
      throw std::invalid_argument("ClimbConfig: channel_order must not repeat channels");
    seen[c - 1] = true;
  }
  if (settle_reads < 1)
    throw std::invalid_argument("ClimbConfig: settle_reads must be >= 1");
  if (stability_window < 2)
    throw std::invalid_argument("ClimbConfig: stability_window must be >= 2");
  if (!(stability_rel_sd > 0.0))
    throw std::invalid_argument("ClimbConfig: stability_rel_sd must be > 0");
}

const char* to_string(ClimbEvent ev) {
  switch (ev) {
    case ClimbEvent::move: return "move";
    case ClimbEvent::reverse: return "reverse";
    case ClimbEvent::stage_advance: return "stage_advance";
    case ClimbEvent::terminate: return "terminate";
  }
  return "unknown";
}

ClimbEvent climb_event_from_string(const std::string& name) {
  if (name == "move") return ClimbEvent::move;
  if (name == "reverse") return ClimbEvent::reverse;
  if (name == "stage_advance") return ClimbEvent::stage_advance;
  if (name == "terminate") return ClimbEvent::terminate;
  throw std::runtime_error("unknown climb event '" + name + "'");
}

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::max_adjustments: return "max_adjustments";
    case TerminationReason::no_further_gain: return "no_further_gain";
    case TerminationReason::sample_budget: return "sample_budget";
  }
  return "unknown";
}

HillClimber::HillClimber(const ClimbConfig& cfg, PowerSource& source, ActuatorBus& bus)
    : cfg_(cfg), source_(source), bus_(bus) {
  cfg_.validate();
}

PowerSample HillClimber::read_averaged() {
  double sum = 0.0;
  PowerSample last{};
  for (int i = 0; i < cfg_.settle_reads; ++i) {
    last = source_.read();
    if (!std::isfinite(last.power_w))
      throw std::runtime_error("HillClimber: power source returned a non-finite value");
    sum += last.power_w;
  }
  return PowerSample{last.time_s, sum / cfg_.settle_reads};
}

void HillClimber::issue_probe() {
  int c = current_channel();
  bus_.move(c, dir_of(c) * cfg_.stage_schedule[stage_]);
}

void HillClimber::emit(double time_s, int channel, double power_w, ClimbEvent ev) {
  ClimbRecord r{time_s, channel, bus_.position(channel), power_w, stage_, ev};
  log_.push_back(r);
  if (sink_) {
    *sink_ << csv::format_double(r.time_s) << ',' << r.channel << ','
           << r.position_steps << ',' << csv::format_double(r.power_w) << ','
           << r.stage << ',' << to_string(r.event) << '\n';
    sink_->flush();
  }
}

void HillClimber::initialize() {
  if (initialized_)
    throw std::logic_error("HillClimber: initialize called twice");
  if (sink_) *sink_ << "time_s,channel,position_steps,power_w,stage,event\n";
  for (int c : cfg_.channel_order) bus_.set_zero(c);
  PowerSample s = read_averaged();  // reference reading before any motion
  p_old_ = s.power_w;
  initialized_ = true;
  issue_probe();
  emit(s.time_s, current_channel(), s.power_w, ClimbEvent::move);
}

void HillClimber::advance_stage() {
  move_done_ = {false, false, false, false};
  ++cycles_;
  if (stage_ + 1 < static_cast<int>(cfg_.stage_schedule.size())) ++stage_;
  order_idx_ = 0;
}

bool HillClimber::all_directions_exhausted() const {
  for (int i = 0; i < 4; ++i)
    if (!fail_plus_[i] || !fail_minus_[i]) return false;
  return true;
}

bool HillClimber::tick() {
  if (!initialized_)
    throw std::logic_error("HillClimber: tick before initialize");
  if (terminated_) return false;

  PowerSample s = read_averaged();

  if (phase_ == Phase::rebase) {
    // Reading taken at the restored position: refresh the reference and move
    // on to the next channel (or the next stage pass).
    p_old_ = s.power_w;
    ClimbEvent ev = ClimbEvent::move;
    if (std::all_of(move_done_.begin(), move_done_.end(), [](bool b) { return b; })) {
      advance_stage();
      ev = ClimbEvent::stage_advance;
    } else {
      ++order_idx_;
    }
    phase_ = Phase::probe;
    issue_probe();
    emit(s.time_s, current_channel(), s.power_w, ev);
    return true;
  }

  // Probe evaluation.
  ++adjustments_;
  p_new_ = s.power_w;
  double dp = p_new_ - p_old_;
  int c = current_channel();
  if (dp > 0.0) {
    p_old_ = p_new_;
    if (at_final_stage()) {
      fail_plus_ = {false, false, false, false};
      fail_minus_ = {false, false, false, false};
    }
    bus_.move(c, dir_of(c) * cfg_.stage_schedule[stage_]);
    emit(s.time_s, c, s.power_w, ClimbEvent::move);
  } else {
    // No gain: step back, remember the failed direction, flip preference.
    bus_.move(c, -dir_of(c) * cfg_.stage_schedule[stage_]);
    if (at_final_stage()) {
      if (dir_of(c) > 0)
        fail_plus_[c - 1] = true;
      else
        fail_minus_[c - 1] = true;
    }
    dirs_[c - 1] = -dirs_[c - 1];
    move_done_[c - 1] = true;
    phase_ = Phase::rebase;
    emit(s.time_s, c, s.power_w, ClimbEvent::reverse);
    if (cfg_.stop_when_converged && at_final_stage() && all_directions_exhausted()) {
      finalize(TerminationReason::no_further_gain);
      return false;
    }
  }
  if (adjustments_ >= cfg_.max_adjustments) {
    finalize(TerminationReason::max_adjustments);
    return false;
  }
  return true;
}

void HillClimber::finalize(TerminationReason reason) {
  if (!initialized_)
    throw std::logic_error("HillClimber: finalize before initialize");
  if (terminated_) return;
  PowerSample s = read_averaged();
  emit(s.time_s, current_channel(), s.power_w, ClimbEvent::terminate);
  terminated_ = true;
  reason_ = reason;
}

RunResult HillClimber::run() {
  initialize();
  while (tick()) {
  }
  return RunResult{reason_, state()};
}

ClimbState HillClimber::state() const {
  ClimbState st;
  st.current_channel = current_channel();
  st.direction = dir_of(st.current_channel);
  st.stage = stage_;
  st.step_size = cfg_.stage_schedule[stage_];
  st.p_old = p_old_;
  st.p_new = p_new_;
  st.move_done = move_done_;
  st.cycles = cycles_;
  st.adjustments = adjustments_;
  return st;
}

void write_climb_log_csv(const std::vector<ClimbRecord>& log, std::ostream& out) {
  out << "time_s,channel,position_steps,power_w,stage,event\n";
  for (const ClimbRecord& r : log) {
    out << csv::format_double(r.time_s) << ',' << r.channel << ','
        << r.position_steps << ',' << csv::format_double(r.power_w) << ','
        << r.stage << ',' << to_string(r.event) << '\n';
  }
}

std::vector<ClimbRecord> read_climb_log_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("climb log: missing header");
  if (line == "time_s,channel,position_steps,power_w,stage,event\r")
    line.pop_back();
  if (line != "time_s,channel,position_steps,power_w,stage,event")
    throw std::runtime_error("climb log: unexpected header '" + line + "'");
  std::vector<ClimbRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = csv::split_fields(line);
    if (f.size() != 6)
      throw std::runtime_error("climb log: expected 6 fields, got line '" + line + "'");
    ClimbRecord r;
    r.time_s = csv::parse_double(f[0]);
    r.channel = static_cast<int>(csv::parse_int(f[1]));
    r.position_steps = csv::parse_int(f[2]);
    r.power_w = csv::parse_double(f[3]);
    r.stage = static_cast<int>(csv::parse_int(f[4]));
    r.event = climb_event_from_string(std::string(f[5]));
    out.push_back(r);
  }
  return out;
}

}  // namespace fiberalign
