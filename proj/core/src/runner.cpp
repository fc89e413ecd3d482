#include "fiberalign/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "json.hpp"

#include "fiberalign/csv.hpp"
#include "fiberalign/optics.hpp"
#include "fiberalign/random.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace fiberalign {

namespace {

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::pair<int, int> random_perturb_steps(const Scenario& sc, std::uint64_t seed) {
  if (sc.random_perturb_max_steps <= 0) return {0, 0};
  // Decorrelated from the bench streams, which chain off the bare seed.
  std::uint64_t chain = seed ^ 0x9e3779b97f4a7c15ULL;
  const int max = sc.random_perturb_max_steps;
  const std::uint64_t span = 2ULL * max + 1ULL;
  int dx = static_cast<int>(splitmix64(chain) % span) - max;
  int dy = static_cast<int>(splitmix64(chain) % span) - max;
  return {dx, dy};
}

AlignmentOutcome run_alignment(const Scenario& sc, std::uint64_t seed,
                               std::ostream* run_csv_sink) {
  sc.validate();
  if (sc.kind != ScenarioKind::align)
    throw std::invalid_argument("run_alignment: scenario kind must be align");

  Bench::Config bc = sc.bench;
  bc.rng_seed = seed;
  Bench bench(bc);

  std::vector<Perturbation> events = sc.perturbations;
  auto [rx, ry] = random_perturb_steps(sc, seed);
  if (rx != 0 || ry != 0)
    events.push_back({0.0, static_cast<double>(rx), static_cast<double>(ry),
                      Perturbation::Unit::steps});
  std::stable_sort(events.begin(), events.end(),
                   [](const Perturbation& a, const Perturbation& b) {
                     return a.time_s < b.time_s;
                   });
  std::size_t next_event = 0;
  double px = 0.0, py = 0.0;
  auto apply_due = [&](double now) {
    while (next_event < events.size() && events[next_event].time_s <= now) {
      const Perturbation& p = events[next_event++];
      double dx = perturbation_axis_rad(p.dx, p.unit, bc);
      double dy = perturbation_axis_rad(p.dy, p.unit, bc);
      bench.inject_perturbation(dx, dy);
      px += dx;
      py += dy;
    }
  };
  apply_due(0.0);

  HillClimber hc(sc.climb, bench, bench);
  if (run_csv_sink) hc.set_csv_sink(run_csv_sink);

  const long long duration = sc.duration_samples;
  const long long settle = sc.climb.settle_reads;

  hc.initialize();
  while (!hc.terminated()) {
    apply_due(bench.clock_s());
    // A tick takes one averaged reading, plus one more if it terminates
    // internally; keep room for the terminate reading either way.
    if (bench.reads() + 2 * settle > duration) {
      hc.finalize(TerminationReason::sample_budget);
      break;
    }
    hc.tick();
  }
  while (bench.reads() < duration) {
    apply_due(bench.clock_s());
    bench.read();
  }

  AlignmentOutcome out;
  out.seed = seed;
  out.trace = bench.sample_log();
  out.climb_log = hc.log();
  out.move_log = bench.move_log();
  out.reason = hc.reason();
  out.perturb_x_rad = px;
  out.perturb_y_rad = py;
  auto [ox, oy] = bench.angular_offset_rad();
  out.final_theta_rad = std::hypot(ox, oy);
  for (int c = 1; c <= 4; ++c) out.final_positions[c - 1] = bench.position(c);
  return out;
}

namespace {

// Shared by the in-memory sweep and the artifact-writing one; dir, when
// given, receives a step<N>/ run tree per sweep entry.
JitterOutcome run_jitter_impl(const Scenario& sc, std::uint64_t seed,
                              const fs::path* dir) {
  JitterOutcome out;
  out.seed = seed;
  out.monotone_decreasing = true;
  for (int s : sc.sweep_steps) {
    Scenario step_sc = sc;
    step_sc.kind = ScenarioKind::align;
    step_sc.climb.stage_schedule = {s};
    AlignmentOutcome oc;
    if (dir) {
      fs::path step_dir = *dir / ("step" + std::to_string(s));
      fs::create_directories(step_dir);
      std::ofstream run_csv = open_out(step_dir / "run.csv");
      oc = run_alignment(step_sc, seed, &run_csv);
      std::ofstream trace = open_out(step_dir / "trace.csv");
      write_trace_csv(oc.trace, trace);
      std::ofstream moves = open_out(step_dir / "move_log.csv");
      write_move_log_csv(oc.move_log, moves);
    } else {
      oc = run_alignment(step_sc, seed);
    }
    RunTrace tr{oc.trace, step_sc.bench.laser_power_w};
    StablePhaseStats st = stable_phase_stats(tr, sc.window_start_s);
    out.points.push_back(SweepPoint{s, std::move(oc), st});
  }
  for (std::size_t i = 1; i < out.points.size(); ++i)
    if (!(out.points[i].window.relative_sd < out.points[i - 1].window.relative_sd))
      out.monotone_decreasing = false;
  return out;
}

}  // namespace

JitterOutcome run_jitter_sweep(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  if (sc.kind != ScenarioKind::jitter_sweep)
    throw std::invalid_argument("run_jitter_sweep: scenario kind must be jitter_sweep");
  return run_jitter_impl(sc, seed, nullptr);
}

CalibrationOutcome run_calibration(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  if (sc.kind != ScenarioKind::calibration)
    throw std::invalid_argument("run_calibration: scenario kind must be calibration");

  std::uint64_t chain = seed;
  NormalSampler meter(splitmix64(chain));
  PiezoChannel::Config cc = sc.bench.channel;
  cc.channel_id = 1;
  cc.jitter_seed = splitmix64(chain);
  PiezoChannel ch(cc);

  const CalibrationGeometry& geo = sc.bench.geometry;
  const CalibrationPlan& plan = sc.calibration;
  auto read_centroid = [&]() {
    double d = spot_centroid_displacement(ch, geo);
    if (plan.measurement_noise_m > 0.0)
      d += meter.next(0.0, plan.measurement_noise_m);
    return d;
  };

  CalibrationOutcome out;
  out.seed = seed;
  double prev = read_centroid();
  for (int s : plan.step_sizes) {
    // Alternate directions so the mirror stays near its starting tilt and
    // the spot stays in the small-angle regime the fit assumes.
    for (int i = 0; i < plan.moves_per_size; ++i) {
      int cmd = (i % 2 == 0) ? s : -s;
      ch.move(cmd);
      double cur = read_centroid();
      out.moves.emplace_back(cmd, cur - prev);
      prev = cur;
    }
  }
  out.estimate = calibrate_gains(out.moves, geo);
  out.forward_rel_err =
      std::abs(out.estimate.forward_gain_rad - cc.forward_gain_rad) / cc.forward_gain_rad;
  out.reverse_rel_err =
      std::abs(out.estimate.reverse_gain_rad - cc.reverse_gain_rad) / cc.reverse_gain_rad;
  return out;
}

FitOutcome run_decay_fit(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  if (sc.kind != ScenarioKind::decay_fit)
    throw std::invalid_argument("run_decay_fit: scenario kind must be decay_fit");

  std::uint64_t chain = seed;
  NormalSampler noise(splitmix64(chain));
  const FiberConfig& f = sc.bench.fiber;
  const FitPlan& plan = sc.fit;
  CouplingModel model{f.base_efficiency, f.effective_waist_m, sc.bench.wavelength_m};

  FitOutcome out;
  out.seed = seed;
  for (int i = 0; i < plan.points; ++i) {
    double theta = plan.theta_max_rad * i / (plan.points - 1);
    double eta = angular_efficiency(model, theta);
    if (plan.noise_rel > 0.0) eta *= 1.0 + noise.next(0.0, plan.noise_rel);
    out.points.emplace_back(theta, std::max(eta, 1e-12));
  }
  out.fit = fit_decay_model(out.points, f.effective_waist_m, sc.bench.wavelength_m);
  out.base_efficiency_err = std::abs(out.fit.base_efficiency - f.base_efficiency);
  return out;
}

namespace {

const std::vector<std::pair<const char*, double>> kThresholds = {
    {"0.70", 0.70}, {"0.80", 0.80}, {"0.90", 0.90}};

ordered_json align_metrics(const Scenario& sc, const AlignmentOutcome& oc) {
  RunTrace tr{oc.trace, sc.bench.laser_power_w};
  ordered_json j;
  j["seed"] = oc.seed;
  j["reason"] = to_string(oc.reason);
  j["reads"] = oc.trace.size();
  j["perturb_rad"] = {{"x", oc.perturb_x_rad}, {"y", oc.perturb_y_rad}};
  j["first_efficiency"] =
      oc.trace.empty() ? 0.0 : oc.trace.front().power_w / sc.bench.laser_power_w;
  ordered_json tt;
  for (const auto& [key, level] : kThresholds)
    tt[key] = opt_json(time_to_threshold(tr, level));
  j["time_to_threshold_s"] = tt;
  try {
    StablePhaseStats st = stable_phase_stats(tr, sc.window_start_s);
    j["stable"] = {{"count", st.sample_count},
                   {"mean_w", st.mean_w},
                   {"sd_w", st.sd_w},
                   {"relative_sd", st.relative_sd},
                   {"overshoots", st.overshoot_count},
                   {"mean_efficiency", st.mean_w / sc.bench.laser_power_w}};
  } catch (const std::exception&) {
    j["stable"] = nullptr;
  }
  j["final"] = {{"theta_rad", oc.final_theta_rad}, {"positions", oc.final_positions}};
  return j;
}

void write_meta(const Scenario& sc, std::uint64_t seed, long long wall_ms,
                const fs::path& dir) {
  std::ofstream meta = open_out(dir / "meta.txt");
  meta << "scenario = " << sc.name << '\n'
       << "kind = " << to_string(sc.kind) << '\n'
       << "seed = " << seed << '\n'
       << "wall_ms = " << wall_ms << '\n';
}

std::string opt_text(const std::optional<double>& v) {
  return v ? fmt_g(*v) + " s" : std::string("-");
}

}  // namespace

int run_scenario_to_dir(const Scenario& sc, const std::string& out_dir,
                        std::ostream& log) {
  sc.validate();
  fs::path root = fs::path(out_dir) / sc.name;
  fs::create_directories(root);
  std::ofstream summary = open_out(root / "summary.jsonl");

  for (std::uint64_t seed : sc.seeds) {
    auto t0 = std::chrono::steady_clock::now();
    fs::path seed_dir = root / std::to_string(seed);
    fs::create_directories(seed_dir);
    ordered_json sum;
    sum["seed"] = seed;

    switch (sc.kind) {
      case ScenarioKind::align: {
        std::ofstream run_csv = open_out(seed_dir / "run.csv");
        AlignmentOutcome oc = run_alignment(sc, seed, &run_csv);
        run_csv.close();
        std::ofstream trace = open_out(seed_dir / "trace.csv");
        write_trace_csv(oc.trace, trace);
        std::ofstream moves = open_out(seed_dir / "move_log.csv");
        write_move_log_csv(oc.move_log, moves);

        ordered_json m = align_metrics(sc, oc);
        std::ofstream analysis = open_out(seed_dir / "analysis.jsonl");
        analysis << m.dump() << '\n';

        RunTrace tr{oc.trace, sc.bench.laser_power_w};
        sum["reason"] = to_string(oc.reason);
        for (const auto& [key, level] : kThresholds)
          sum["t" + std::string(key) + "_s"] = opt_json(time_to_threshold(tr, level));
        sum["mean_efficiency"] = m["stable"].is_null()
                                     ? ordered_json(nullptr)
                                     : m["stable"]["mean_efficiency"];
        sum["relative_sd"] =
            m["stable"].is_null() ? ordered_json(nullptr) : m["stable"]["relative_sd"];
        sum["final_theta_rad"] = oc.final_theta_rad;

        log << sc.name << " seed " << seed << ": " << to_string(oc.reason) << ", "
            << oc.trace.size() << " reads, t0.70 "
            << opt_text(time_to_threshold(tr, 0.70)) << ", final angle "
            << fmt_g(oc.final_theta_rad) << " rad\n";
      } break;

      case ScenarioKind::jitter_sweep: {
        JitterOutcome jo = run_jitter_impl(sc, seed, &seed_dir);
        std::ofstream analysis = open_out(seed_dir / "analysis.jsonl");
        ordered_json rel;
        std::string parts;
        for (const SweepPoint& p : jo.points) {
          ordered_json line;
          line["seed"] = seed;
          line["step_size"] = p.step_size;
          line["relative_sd"] = p.window.relative_sd;
          line["mean_w"] = p.window.mean_w;
          line["reason"] = to_string(p.outcome.reason);
          analysis << line.dump() << '\n';
          rel["step" + std::to_string(p.step_size)] = p.window.relative_sd;
          if (!parts.empty()) parts += '/';
          parts += fmt_g(p.window.relative_sd);
        }
        sum["relative_sd"] = rel;
        sum["monotone"] = jo.monotone_decreasing;

        log << sc.name << " seed " << seed << ": rel sd " << parts << ", monotone "
            << (jo.monotone_decreasing ? "yes" : "no") << '\n';
      } break;

      case ScenarioKind::calibration: {
        CalibrationOutcome oc = run_calibration(sc, seed);
        std::ofstream moves = open_out(seed_dir / "moves.csv");
        moves << "steps,displacement_m\n";
        for (const auto& [steps, ds] : oc.moves)
          moves << steps << ',' << csv::format_double(ds) << '\n';

        ordered_json m;
        m["seed"] = seed;
        m["forward_gain_rad"] = oc.estimate.forward_gain_rad;
        m["reverse_gain_rad"] = oc.estimate.reverse_gain_rad;
        m["forward_rel_err"] = oc.forward_rel_err;
        m["reverse_rel_err"] = oc.reverse_rel_err;
        std::ofstream analysis = open_out(seed_dir / "analysis.jsonl");
        analysis << m.dump() << '\n';
        sum = m;

        log << sc.name << " seed " << seed << ": forward err "
            << fmt_g(100.0 * oc.forward_rel_err) << "%, reverse err "
            << fmt_g(100.0 * oc.reverse_rel_err) << "%\n";
      } break;

      case ScenarioKind::decay_fit: {
        FitOutcome oc = run_decay_fit(sc, seed);
        std::ofstream pts = open_out(seed_dir / "points.csv");
        write_pairs_csv(oc.points, "theta_rad,efficiency", pts);

        ordered_json m;
        m["seed"] = seed;
        m["base_efficiency"] = oc.fit.base_efficiency;
        m["residual_norm"] = oc.fit.residual_norm;
        m["abs_err"] = oc.base_efficiency_err;
        std::ofstream analysis = open_out(seed_dir / "analysis.jsonl");
        analysis << m.dump() << '\n';
        sum = m;

        log << sc.name << " seed " << seed << ": ceiling "
            << fmt_g(oc.fit.base_efficiency) << " (err "
            << fmt_g(oc.base_efficiency_err) << "), residual "
            << fmt_g(oc.fit.residual_norm) << '\n';
      } break;
    }

    auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    write_meta(sc, seed, wall_ms, seed_dir);
    summary << sum.dump() << '\n';
  }
  return static_cast<int>(sc.seeds.size());
}

}  // namespace fiberalign
