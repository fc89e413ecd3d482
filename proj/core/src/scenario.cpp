#include "fiberalign/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string_view>

#include "fiberalign/csv.hpp"
#include "fiberalign/units.hpp"

namespace fiberalign {

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw std::runtime_error("scenario config: bad value '" + value + "' for key '" +
                           key + "': " + why);
}

double req_double(const std::string& key, const std::string& value) {
  try {
    return csv::parse_double(value);
  } catch (const std::exception&) {
    bad_value(key, value, "expected a number");
  }
}

long long req_int(const std::string& key, const std::string& value) {
  try {
    return csv::parse_int(value);
  } catch (const std::exception&) {
    bad_value(key, value, "expected an integer");
  }
}

bool req_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// Lists accept spaces, commas, or both: "80 40 8" and "80, 40, 8" are equal.
std::vector<int> req_int_list(const std::string& key, const std::string& value) {
  std::string spaced = value;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::vector<int> out;
  for (const std::string& item : split_ws(spaced))
    out.push_back(static_cast<int>(req_int(key, item)));
  if (out.empty()) bad_value(key, value, "expected a list of integers");
  return out;
}

// Either "a..b" (inclusive) or a comma-separated list.
std::vector<std::uint64_t> req_seed_spec(const std::string& key, const std::string& value) {
  std::vector<std::uint64_t> out;
  auto range = value.find("..");
  if (range != std::string::npos) {
    long long a = req_int(key, trim(value.substr(0, range)));
    long long b = req_int(key, trim(value.substr(range + 2)));
    if (a < 0 || b < a) bad_value(key, value, "expected lo..hi with 0 <= lo <= hi");
    if (b - a >= 100000) bad_value(key, value, "seed range too large");
    for (long long s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
    return out;
  }
  for (auto field : csv::split_fields(value)) {
    long long s = req_int(key, trim(field));
    if (s < 0) bad_value(key, value, "seeds must be >= 0");
    out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

bool filesystem_safe(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::align: return "align";
    case ScenarioKind::jitter_sweep: return "jitter_sweep";
    case ScenarioKind::calibration: return "calibration";
    case ScenarioKind::decay_fit: return "decay_fit";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "align") return ScenarioKind::align;
  if (name == "jitter_sweep") return ScenarioKind::jitter_sweep;
  if (name == "calibration") return ScenarioKind::calibration;
  if (name == "decay_fit") return ScenarioKind::decay_fit;
  throw std::runtime_error("unknown scenario kind '" + name + "'");
}

double perturbation_axis_rad(double value, Perturbation::Unit unit,
                             const Bench::Config& bench) {
  if (unit == Perturbation::Unit::radians) return value;
  return value * bench.channel.forward_gain_rad * bench.geometry.fold_factor;
}

void CalibrationPlan::validate() const {
  if (step_sizes.empty())
    throw std::invalid_argument("CalibrationPlan: step_sizes must not be empty");
  for (int s : step_sizes)
    if (s < 1) throw std::invalid_argument("CalibrationPlan: step sizes must be >= 1");
  if (moves_per_size < 1)
    throw std::invalid_argument("CalibrationPlan: moves_per_size must be >= 1");
  if (measurement_noise_m < 0.0)
    throw std::invalid_argument("CalibrationPlan: measurement_noise_m must be >= 0");
}

void FitPlan::validate() const {
  if (points < 5)
    throw std::invalid_argument("FitPlan: points must be >= 5");
  if (!(theta_max_rad > 0.0))
    throw std::invalid_argument("FitPlan: theta_max_rad must be > 0");
  if (noise_rel < 0.0 || noise_rel > 0.2)
    throw std::invalid_argument("FitPlan: noise_rel must be in [0, 0.2]");
}

void Scenario::validate() const {
  if (!filesystem_safe(name))
    throw std::invalid_argument(
        "Scenario: name must be non-empty and use only [A-Za-z0-9_-]");
  if (seeds.empty())
    throw std::invalid_argument("Scenario: seeds must not be empty");
  auto sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("Scenario: seeds must be unique");
  bench.validate();
  climb.validate();
  if (duration_samples < 1)
    throw std::invalid_argument("Scenario: duration_samples must be >= 1");
  if ((kind == ScenarioKind::align || kind == ScenarioKind::jitter_sweep) &&
      duration_samples < 2 * climb.settle_reads)
    throw std::invalid_argument(
        "Scenario: duration_samples must cover at least the reference and "
        "terminate readings (2 * settle_reads)");
  if (window_start_s < 0.0)
    throw std::invalid_argument("Scenario: window_start_s must be >= 0");
  if (random_perturb_max_steps < 0)
    throw std::invalid_argument("Scenario: random_perturb_max_steps must be >= 0");
  for (const Perturbation& p : perturbations)
    if (p.time_s < 0.0)
      throw std::invalid_argument("Scenario: perturbation times must be >= 0");
  if (kind == ScenarioKind::jitter_sweep) {
    if (sweep_steps.empty())
      throw std::invalid_argument("Scenario: sweep_steps must not be empty");
    for (int s : sweep_steps)
      if (s < 1) throw std::invalid_argument("Scenario: sweep steps must be >= 1");
  }
  // Both plans are validated even when the kind ignores them: a config that
  // sets nonsense should fail loudly, not depend on which runner reads it.
  calibration.validate();
  fit.validate();
}

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  // Gain overrides interact (reverse is specified as a ratio of forward), so
  // they are collected first and applied once the whole file is read.
  std::optional<double> forward_arcsec;
  std::optional<double> reverse_ratio;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string text = trim(line);
    if (text.empty()) continue;
    auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("scenario config: line " + std::to_string(line_no) +
                               " is not of the form key = value");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("scenario config: line " + std::to_string(line_no) +
                               " has an empty key or value");

    if (key == "scenario.kind") {
      try {
        sc.kind = scenario_kind_from_string(value);
      } catch (const std::exception&) {
        bad_value(key, value, "expected align, jitter_sweep, calibration or decay_fit");
      }
    } else if (key == "scenario.name") {
      sc.name = value;
    } else if (key == "scenario.seeds") {
      sc.seeds = req_seed_spec(key, value);
    } else if (key == "bench.fiber") {
      if (value == "single_mode")
        sc.bench.fiber = FiberConfig::single_mode_default();
      else if (value == "multi_mode")
        sc.bench.fiber = FiberConfig::multi_mode_default();
      else
        bad_value(key, value, "expected single_mode or multi_mode");
    } else if (key == "bench.effective_waist_mm") {
      sc.bench.fiber.effective_waist_m = req_double(key, value) * 1e-3;
    } else if (key == "bench.base_efficiency") {
      sc.bench.fiber.base_efficiency = req_double(key, value);
    } else if (key == "bench.laser_power_mw") {
      sc.bench.laser_power_w = req_double(key, value) * 1e-3;
    } else if (key == "bench.wavelength_nm") {
      sc.bench.wavelength_m = req_double(key, value) * 1e-9;
    } else if (key == "bench.sample_period_s") {
      sc.bench.sample_period_s = req_double(key, value);
    } else if (key == "bench.noise_rel") {
      sc.bench.noise.relative_sigma = req_double(key, value);
    } else if (key == "bench.noise_floor_w") {
      sc.bench.noise.additive_floor_w = req_double(key, value);
    } else if (key == "bench.forward_gain_arcsec") {
      forward_arcsec = req_double(key, value);
    } else if (key == "bench.reverse_ratio") {
      reverse_ratio = req_double(key, value);
    } else if (key == "bench.gain_jitter_rel") {
      sc.bench.channel.gain_jitter_rel = req_double(key, value);
    } else if (key == "bench.lever_arm_m") {
      sc.bench.geometry.lever_arm_m = req_double(key, value);
    } else if (key == "bench.fold_factor") {
      sc.bench.geometry.fold_factor = req_double(key, value);
    } else if (key == "climb.profile") {
      if (value == "fine")
        sc.climb.stage_schedule = ClimbConfig::fine_profile();
      else if (value == "coarse")
        sc.climb.stage_schedule = ClimbConfig::coarse_profile();
      else
        bad_value(key, value, "expected fine or coarse");
    } else if (key == "climb.schedule") {
      sc.climb.stage_schedule = req_int_list(key, value);
    } else if (key == "climb.max_adjustments") {
      sc.climb.max_adjustments = static_cast<int>(req_int(key, value));
    } else if (key == "climb.settle_reads") {
      sc.climb.settle_reads = static_cast<int>(req_int(key, value));
    } else if (key == "climb.channel_order") {
      auto order = req_int_list(key, value);
      if (order.size() != 4) bad_value(key, value, "expected exactly 4 channels");
      std::copy(order.begin(), order.end(), sc.climb.channel_order.begin());
    } else if (key == "climb.stop_when_converged") {
      sc.climb.stop_when_converged = req_bool(key, value);
    } else if (key == "run.duration_samples") {
      sc.duration_samples = static_cast<int>(req_int(key, value));
    } else if (key == "run.window_start_s") {
      sc.window_start_s = req_double(key, value);
    } else if (key == "run.sweep_steps") {
      sc.sweep_steps = req_int_list(key, value);
    } else if (key == "perturb.event") {
      auto tok = split_ws(value);
      if (tok.size() != 3 && tok.size() != 4)
        bad_value(key, value, "expected <time_s> <dx> <dy> [steps|rad]");
      Perturbation p;
      p.time_s = req_double(key, tok[0]);
      p.dx = req_double(key, tok[1]);
      p.dy = req_double(key, tok[2]);
      if (tok.size() == 4) {
        if (tok[3] == "steps")
          p.unit = Perturbation::Unit::steps;
        else if (tok[3] == "rad")
          p.unit = Perturbation::Unit::radians;
        else
          bad_value(key, value, "unit must be steps or rad");
      }
      sc.perturbations.push_back(p);
    } else if (key == "perturb.random_steps") {
      sc.random_perturb_max_steps = static_cast<int>(req_int(key, value));
    } else if (key == "calibrate.step_sizes") {
      sc.calibration.step_sizes = req_int_list(key, value);
    } else if (key == "calibrate.moves_per_size") {
      sc.calibration.moves_per_size = static_cast<int>(req_int(key, value));
    } else if (key == "calibrate.noise_m") {
      sc.calibration.measurement_noise_m = req_double(key, value);
    } else if (key == "fit.points") {
      sc.fit.points = static_cast<int>(req_int(key, value));
    } else if (key == "fit.theta_max_rad") {
      sc.fit.theta_max_rad = req_double(key, value);
    } else if (key == "fit.noise_rel") {
      sc.fit.noise_rel = req_double(key, value);
    } else {
      throw std::runtime_error("scenario config: unknown key '" + key + "'");
    }
  }

  if (forward_arcsec || reverse_ratio) {
    double fwd = forward_arcsec ? *forward_arcsec
                                : rad_to_arcsec(sc.bench.channel.forward_gain_rad);
    double ratio = reverse_ratio.value_or(0.95);
    sc.bench.channel.forward_gain_rad = arcsec_to_rad(fwd);
    sc.bench.channel.reverse_gain_rad = arcsec_to_rad(fwd) * ratio;
  }

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("scenario config: ") + e.what());
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open scenario file '" + path + "'");
  try {
    return parse_scenario(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " (" + path + ")");
  }
}

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

void make_gains_symmetric(Scenario& sc) {
  sc.bench.channel.reverse_gain_rad = sc.bench.channel.forward_gain_rad;
}

}  // namespace

Scenario builtin_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "smf_fine") {
    sc.seeds = seed_range(1, 100);
    sc.perturbations.push_back({0.0, 70.0, 67.0, Perturbation::Unit::steps});
  } else if (name == "mmf_coarse") {
    sc.seeds = seed_range(1, 100);
    sc.bench.fiber = FiberConfig::multi_mode_default();
    sc.climb.stage_schedule = ClimbConfig::coarse_profile();
    sc.perturbations.push_back({0.0, 260.0, 250.0, Perturbation::Unit::steps});
  } else if (name == "jitter_sweep") {
    sc.kind = ScenarioKind::jitter_sweep;
    sc.seeds = seed_range(1, 20);
    sc.climb.stop_when_converged = false;
    sc.climb.max_adjustments = 1000000;
    sc.sweep_steps = {100, 50, 10, 5};
    sc.duration_samples = 500;
    sc.window_start_s = 50.0;
  } else if (name == "calibration") {
    sc.kind = ScenarioKind::calibration;
    sc.seeds = seed_range(1, 20);
  } else if (name == "decay_fit") {
    sc.kind = ScenarioKind::decay_fit;
    sc.seeds = seed_range(1, 100);
  } else if (name == "smf_fine_exact") {
    // Noise-free, symmetric-drive variant for measuring the controller's
    // resting accuracy alone. Start offsets land on the step lattice.
    sc.seeds = seed_range(1, 25);
    sc.bench.noise = NoiseModel{0.0, 0.0};
    make_gains_symmetric(sc);
    sc.random_perturb_max_steps = 80;
  } else if (name == "smf_fine_lownoise") {
    // Same, with just enough meter noise to exercise noisy convergence while
    // staying below the step quantisation floor.
    sc.seeds = seed_range(1, 25);
    sc.bench.noise = NoiseModel{1e-4, 1e-7};
    make_gains_symmetric(sc);
    sc.random_perturb_max_steps = 80;
  } else {
    throw std::runtime_error("unknown scenario '" + name + "'");
  }
  sc.validate();
  return sc;
}

std::vector<std::string> builtin_scenario_names() {
  return {"smf_fine",    "mmf_coarse", "jitter_sweep",  "calibration",
          "decay_fit",   "smf_fine_exact", "smf_fine_lownoise"};
}

}  // namespace fiberalign
