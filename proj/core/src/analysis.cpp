#include "fiberalign/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "fiberalign/csv.hpp"
#include "fiberalign/units.hpp"

namespace fiberalign {

namespace {

void require_input_power(const RunTrace& trace) {
  if (!(trace.laser_power_w > 0.0))
    throw std::invalid_argument("RunTrace: laser_power_w must be > 0");
}

}  // namespace

std::vector<std::pair<double, double>> efficiency_trace(const RunTrace& trace) {
  require_input_power(trace);
  std::vector<std::pair<double, double>> out;
  out.reserve(trace.samples.size());
  for (const PowerSample& s : trace.samples)
    out.emplace_back(s.time_s, s.power_w / trace.laser_power_w);
  return out;
}

std::optional<double> time_to_threshold(const RunTrace& trace, double threshold,
                                        int sustain) {
  require_input_power(trace);
  if (sustain < 1)
    throw std::invalid_argument("time_to_threshold: sustain must be >= 1");
  int run = 0;
  double run_start = 0.0;
  for (const PowerSample& s : trace.samples) {
    if (s.power_w / trace.laser_power_w >= threshold) {
      if (run == 0) run_start = s.time_s;
      if (++run >= sustain) return run_start;
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

StablePhaseStats stable_phase_stats(const RunTrace& trace, double window_start_s) {
  std::vector<double> w;
  for (const PowerSample& s : trace.samples)
    if (s.time_s >= window_start_s) w.push_back(s.power_w);
  if (w.size() < 20)
    throw std::invalid_argument("stable_phase_stats: window holds fewer than 20 samples");
  double n = static_cast<double>(w.size());
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : w) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  if (!(mean > 0.0))
    throw std::domain_error("stable_phase_stats: window mean is not positive");
  int overshoots = 0;
  for (double v : w)
    if (v < mean - 3.0 * sd) ++overshoots;
  return StablePhaseStats{static_cast<int>(w.size()), mean, sd, sd / mean, overshoots};
}

std::optional<double> first_stable_time(const RunTrace& trace, int window,
                                        double rel_sd_limit) {
  if (window < 2)
    throw std::invalid_argument("first_stable_time: window must be >= 2");
  const auto& s = trace.samples;
  if (static_cast<int>(s.size()) < window) return std::nullopt;
  for (std::size_t end = window; end <= s.size(); ++end) {
    double mean = 0.0;
    for (std::size_t i = end - window; i < end; ++i) mean += s[i].power_w;
    mean /= window;
    if (!(mean > 0.0)) continue;
    double ss = 0.0;
    for (std::size_t i = end - window; i < end; ++i)
      ss += (s[i].power_w - mean) * (s[i].power_w - mean);
    double sd = std::sqrt(ss / (window - 1.0));
    if (sd / mean < rel_sd_limit) return s[end - 1].time_s;
  }
  return std::nullopt;
}

DecayFit fit_decay_model(const std::vector<std::pair<double, double>>& theta_eff,
                         double waist_radius_m, double wavelength_m) {
  if (!(waist_radius_m > 0.0) || !(wavelength_m > 0.0))
    throw std::invalid_argument("fit_decay_model: waist and wavelength must be > 0");
  if (theta_eff.size() < 5)
    throw std::invalid_argument("fit_decay_model: need at least 5 points");
  double theta_min = theta_eff.front().first;
  double theta_max = theta_min;
  for (const auto& [theta, eff] : theta_eff) {
    if (!(eff > 0.0))
      throw std::invalid_argument("fit_decay_model: efficiencies must be > 0");
    theta_min = std::min(theta_min, theta);
    theta_max = std::max(theta_max, theta);
  }
  if (theta_min == theta_max)
    throw std::invalid_argument("fit_decay_model: degenerate input, all angles identical");
  // eta = T * b(theta) with b known, so the least-squares ceiling is
  // T = sum(eta * b) / sum(b^2).
  double sbb = 0.0, seb = 0.0;
  for (const auto& [theta, eff] : theta_eff) {
    double x = kPi * waist_radius_m * theta / wavelength_m;
    double b = std::exp(-x * x);
    sbb += b * b;
    seb += eff * b;
  }
  double t = seb / sbb;
  double ss = 0.0;
  for (const auto& [theta, eff] : theta_eff) {
    double x = kPi * waist_radius_m * theta / wavelength_m;
    double r = eff - t * std::exp(-x * x);
    ss += r * r;
  }
  return DecayFit{t, std::sqrt(ss)};
}

AngleTrajectory angle_trajectory(const RunTrace& trace, const CouplingModel& model) {
  require_input_power(trace);
  model.validate();
  AngleTrajectory out;
  out.points.reserve(trace.samples.size());
  for (const PowerSample& s : trace.samples) {
    if (!(s.power_w > 0.0)) {
      ++out.skipped;
      continue;
    }
    double eff = s.power_w / trace.laser_power_w;
    double theta = eff >= model.base_efficiency ? 0.0 : invert_angle(model, eff);
    out.points.emplace_back(s.time_s, theta);
  }
  return out;
}

void write_trace_csv(const std::vector<PowerSample>& samples, std::ostream& out) {
  out << "time_s,power_w\n";
  for (const PowerSample& s : samples)
    out << csv::format_double(s.time_s) << ',' << csv::format_double(s.power_w) << '\n';
}

void write_pairs_csv(const std::vector<std::pair<double, double>>& rows,
                     const std::string& header, std::ostream& out) {
  out << header << '\n';
  for (const auto& [a, b] : rows)
    out << csv::format_double(a) << ',' << csv::format_double(b) << '\n';
}

std::vector<PowerSample> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("trace csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = csv::split_fields(line);
  int time_col = -1, power_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "time_s") time_col = static_cast<int>(i);
    if (header[i] == "power_w") power_col = static_cast<int>(i);
  }
  if (time_col < 0 || power_col < 0)
    throw std::runtime_error("trace csv: header must contain time_s and power_w columns");
  std::vector<PowerSample> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = csv::split_fields(line);
    if (static_cast<int>(f.size()) <= std::max(time_col, power_col))
      throw std::runtime_error("trace csv: short row '" + line + "'");
    out.push_back(PowerSample{csv::parse_double(f[time_col]), csv::parse_double(f[power_col])});
  }
  return out;
}

}  // namespace fiberalign
