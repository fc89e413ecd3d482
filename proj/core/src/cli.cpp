#include "fiberalign/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fiberalign/analysis.hpp"
#include "fiberalign/csv.hpp"
#include "fiberalign/runner.hpp"
#include "fiberalign/scenario.hpp"
#include "fiberalign/units.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace fiberalign {

namespace {

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Swallows progress output under --quiet.
class NullBuffer : public std::streambuf {
 protected:
  int overflow(int c) override { return c; }
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

// Strict two-column CSV with the given header.
std::vector<std::pair<double, double>> read_two_column_csv(const std::string& path,
                                                           const std::string& header) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw std::runtime_error(path + ": expected header '" + header + "', got '" +
                             line + "'");
  std::vector<std::pair<double, double>> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = csv::split_fields(line);
    if (f.size() != 2)
      throw std::runtime_error(path + ": expected 2 fields, got line '" + line + "'");
    out.emplace_back(csv::parse_double(f[0]), csv::parse_double(f[1]));
  }
  return out;
}

std::string default_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("FIBERALIGN_OUT_DIR"); env && *env) return env;
  return "out";
}

Scenario resolve_scenario(const std::string& ref) {
  if (fs::exists(ref)) return load_scenario_file(ref);
  try {
    return builtin_scenario(ref);
  } catch (const std::exception&) {
    std::string names;
    for (const std::string& n : builtin_scenario_names()) {
      if (!names.empty()) names += ", ";
      names += n;
    }
    throw std::runtime_error("no scenario file or built-in named '" + ref +
                             "' (built-ins: " + names + ")");
  }
}

int cmd_run(const std::string& scenario_ref, const std::string& out_dir_flag,
            const std::vector<std::uint64_t>& seed_override, bool quiet,
            std::ostream& out) {
  Scenario sc = resolve_scenario(scenario_ref);
  if (!seed_override.empty()) sc.seeds = seed_override;
  std::string out_dir = default_out_dir(out_dir_flag);

  NullBuffer null_buf;
  std::ostream null_stream(&null_buf);
  int n = run_scenario_to_dir(sc, out_dir, quiet ? null_stream : out);
  out << n << " run(s) written under " << (fs::path(out_dir) / sc.name).string()
      << '\n';
  return 0;
}

int cmd_analyze(const std::string& trace_path, double laser_power_mw,
                double window_start_s, const std::vector<double>& thresholds,
                double base_efficiency, double waist_mm, double wavelength_nm,
                const std::string& efficiency_csv, const std::string& angle_csv,
                bool as_json, std::ostream& out) {
  std::ifstream in = open_in(trace_path);
  RunTrace trace{read_trace_csv(in), laser_power_mw * 1e-3};
  if (trace.samples.empty())
    throw std::runtime_error(trace_path + ": no samples");

  ordered_json j;
  j["samples"] = trace.samples.size();
  j["duration_s"] = trace.samples.back().time_s;
  auto eff = efficiency_trace(trace);
  double peak = 0.0;
  for (const auto& [t, e] : eff) peak = std::max(peak, e);
  j["first_efficiency"] = eff.front().second;
  j["peak_efficiency"] = peak;

  ordered_json tt;
  for (double level : thresholds) {
    auto t = time_to_threshold(trace, level);
    tt[fmt_g(level)] = t ? ordered_json(*t) : ordered_json(nullptr);
  }
  j["time_to_threshold_s"] = tt;

  j["window_start_s"] = window_start_s;
  try {
    StablePhaseStats st = stable_phase_stats(trace, window_start_s);
    j["stable"] = {{"count", st.sample_count},
                   {"mean_w", st.mean_w},
                   {"sd_w", st.sd_w},
                   {"relative_sd", st.relative_sd},
                   {"overshoots", st.overshoot_count},
                   {"mean_efficiency", st.mean_w / trace.laser_power_w}};
  } catch (const std::exception&) {
    j["stable"] = nullptr;
  }

  if (!efficiency_csv.empty()) {
    std::ofstream ecsv(efficiency_csv);
    if (!ecsv) throw std::runtime_error("cannot write '" + efficiency_csv + "'");
    write_pairs_csv(eff, "time_s,efficiency", ecsv);
  }
  if (!angle_csv.empty()) {
    CouplingModel model{base_efficiency, waist_mm * 1e-3, wavelength_nm * 1e-9};
    AngleTrajectory traj = angle_trajectory(trace, model);
    std::ofstream acsv(angle_csv);
    if (!acsv) throw std::runtime_error("cannot write '" + angle_csv + "'");
    write_pairs_csv(traj.points, "time_s,theta_rad", acsv);
    j["angle_points"] = traj.points.size();
    j["angle_skipped"] = traj.skipped;
  }

  if (as_json) {
    out << j.dump() << '\n';
    return 0;
  }
  out << "samples           " << j["samples"] << '\n'
      << "duration          " << fmt_g(j["duration_s"].get<double>()) << " s\n"
      << "first efficiency  " << fmt_g(j["first_efficiency"].get<double>()) << '\n'
      << "peak efficiency   " << fmt_g(j["peak_efficiency"].get<double>()) << '\n';
  for (auto& [key, value] : j["time_to_threshold_s"].items())
    out << "time to " << key << "      "
        << (value.is_null() ? std::string("-") : fmt_g(value.get<double>()) + " s")
        << '\n';
  if (j["stable"].is_null()) {
    out << "settled window    too few samples after " << fmt_g(window_start_s)
        << " s\n";
  } else {
    auto& st = j["stable"];
    out << "settled window    " << st["count"] << " samples from "
        << fmt_g(window_start_s) << " s\n"
        << "window mean       " << fmt_g(st["mean_w"].get<double>())
        << " W (efficiency " << fmt_g(st["mean_efficiency"].get<double>()) << ")\n"
        << "window rel sd     " << fmt_g(st["relative_sd"].get<double>()) << '\n'
        << "overshoots        " << st["overshoots"] << '\n';
  }
  if (j.contains("angle_skipped"))
    out << "angle samples     " << j["angle_points"] << " (skipped "
        << j["angle_skipped"] << " non-positive)\n";
  return 0;
}

int cmd_calibrate(const std::string& moves_path, double lever_arm_m,
                  double fold_factor, bool as_json, std::ostream& out) {
  auto rows = read_two_column_csv(moves_path, "steps,displacement_m");
  std::vector<std::pair<int, double>> moves;
  moves.reserve(rows.size());
  for (const auto& [steps, ds] : rows)
    moves.emplace_back(static_cast<int>(steps), ds);
  CalibrationGeometry geo{lever_arm_m, fold_factor};
  GainEstimate est = calibrate_gains(moves, geo);

  if (as_json) {
    ordered_json j;
    j["moves"] = moves.size();
    j["forward_gain_rad"] = est.forward_gain_rad;
    j["reverse_gain_rad"] = est.reverse_gain_rad;
    j["forward_gain_arcsec"] = rad_to_arcsec(est.forward_gain_rad);
    j["reverse_gain_arcsec"] = rad_to_arcsec(est.reverse_gain_rad);
    out << j.dump() << '\n';
    return 0;
  }
  out << "moves             " << moves.size() << '\n'
      << "forward gain      " << fmt_g(est.forward_gain_rad) << " rad/step ("
      << fmt_g(rad_to_arcsec(est.forward_gain_rad)) << " arcsec)\n"
      << "reverse gain      " << fmt_g(est.reverse_gain_rad) << " rad/step ("
      << fmt_g(rad_to_arcsec(est.reverse_gain_rad)) << " arcsec)\n"
      << "reverse/forward   " << fmt_g(est.reverse_gain_rad / est.forward_gain_rad)
      << '\n';
  return 0;
}

int cmd_fit(const std::string& points_path, double waist_mm, double wavelength_nm,
            bool as_json, std::ostream& out) {
  auto points = read_two_column_csv(points_path, "theta_rad,efficiency");
  double waist_m = waist_mm * 1e-3;
  double wavelength_m = wavelength_nm * 1e-9;
  DecayFit fit = fit_decay_model(points, waist_m, wavelength_m);
  double efold = wavelength_m / (kPi * waist_m);

  if (as_json) {
    ordered_json j;
    j["points"] = points.size();
    j["base_efficiency"] = fit.base_efficiency;
    j["residual_norm"] = fit.residual_norm;
    j["efold_angle_rad"] = efold;
    out << j.dump() << '\n';
    return 0;
  }
  out << "points            " << points.size() << '\n'
      << "coupling ceiling  " << fmt_g(fit.base_efficiency) << '\n'
      << "residual norm     " << fmt_g(fit.residual_norm) << '\n'
      << "e-folding angle   " << fmt_g(efold) << " rad ("
      << fmt_g(rad_to_arcsec(efold)) << " arcsec)\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Fiber alignment bench simulator and trace analysis tools",
               "fiberalign"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fiberalign 0.1.0");

  auto* run = app.add_subcommand("run", "Run a scenario batch and write artifacts");
  std::string scenario_ref;
  run->add_option("scenario", scenario_ref, "Scenario file path or built-in name");
  std::string out_dir;
  run->add_option("--out-dir", out_dir,
                  "Artifact root (default: $FIBERALIGN_OUT_DIR, else ./out)");
  std::vector<std::uint64_t> seeds;
  run->add_option("--seed", seeds, "Run only the given seed (repeatable)");
  bool quiet = false;
  run->add_flag("--quiet", quiet, "Suppress per-seed progress lines");
  bool list_builtins = false;
  run->add_flag("--list", list_builtins, "List built-in scenarios and exit");

  auto* analyze = app.add_subcommand("analyze", "Summarise a power trace CSV");
  std::string trace_path;
  analyze->add_option("trace", trace_path, "CSV with time_s and power_w columns")
      ->required();
  double laser_power_mw = 16.2;
  analyze->add_option("--laser-power-mw", laser_power_mw, "Input power")->capture_default_str();
  double window_start_s = 65.0;
  analyze->add_option("--window-start-s", window_start_s,
                      "Start of the settled statistics window")->capture_default_str();
  std::vector<double> thresholds = {0.70, 0.80, 0.90};
  analyze->add_option("--threshold", thresholds,
                      "Efficiency thresholds to time (repeatable)");
  double base_efficiency = 0.8;
  analyze->add_option("--base-efficiency", base_efficiency,
                      "Coupling ceiling for angle recovery")->capture_default_str();
  double waist_mm = 1.625;
  analyze->add_option("--waist-mm", waist_mm, "Effective waist for angle recovery")->capture_default_str();
  double wavelength_nm = 780.0;
  analyze->add_option("--wavelength-nm", wavelength_nm, "Laser wavelength")->capture_default_str();
  std::string efficiency_csv;
  analyze->add_option("--efficiency-csv", efficiency_csv,
                      "Write a time_s,efficiency CSV here");
  std::string angle_csv;
  analyze->add_option("--angle-csv", angle_csv,
                      "Write a recovered time_s,theta_rad CSV here");
  bool analyze_json = false;
  analyze->add_flag("--json", analyze_json, "Emit one JSON object instead of text");

  auto* calibrate =
      app.add_subcommand("calibrate", "Recover step gains from a move table");
  std::string moves_path;
  calibrate->add_option("moves", moves_path, "CSV with steps,displacement_m rows")
      ->required();
  double lever_arm_m = 0.085;
  calibrate->add_option("--lever-arm-m", lever_arm_m,
                        "Mirror to collimator distance")->capture_default_str();
  double fold_factor = 2.0;
  calibrate->add_option("--fold-factor", fold_factor,
                        "Beam deflection per unit mirror tilt")->capture_default_str();
  bool calibrate_json = false;
  calibrate->add_flag("--json", calibrate_json, "Emit one JSON object instead of text");

  auto* fit = app.add_subcommand("fit", "Fit the angular decay model to points");
  std::string points_path;
  fit->add_option("points", points_path, "CSV with theta_rad,efficiency rows")
      ->required();
  double fit_waist_mm = 1.625;
  fit->add_option("--waist-mm", fit_waist_mm, "Effective waist")->capture_default_str();
  double fit_wavelength_nm = 780.0;
  fit->add_option("--wavelength-nm", fit_wavelength_nm, "Laser wavelength")->capture_default_str();
  bool fit_json = false;
  fit->add_flag("--json", fit_json, "Emit one JSON object instead of text");

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      if (list_builtins) {
        for (const std::string& n : builtin_scenario_names()) out << n << '\n';
        return 0;
      }
      if (scenario_ref.empty()) throw CLI::RequiredError("scenario");
      return cmd_run(scenario_ref, out_dir, seeds, quiet, out);
    }
    if (analyze->parsed())
      return cmd_analyze(trace_path, laser_power_mw, window_start_s, thresholds,
                         base_efficiency, waist_mm, wavelength_nm, efficiency_csv,
                         angle_csv, analyze_json, out);
    if (calibrate->parsed())
      return cmd_calibrate(moves_path, lever_arm_m, fold_factor, calibrate_json, out);
    if (fit->parsed())
      return cmd_fit(points_path, fit_waist_mm, fit_wavelength_nm, fit_json, out);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fiberalign
