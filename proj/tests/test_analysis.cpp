#include "doctest.h"

#include <cmath>
#include <sstream>

#include "fiberalign/analysis.hpp"

using namespace fiberalign;

namespace {

RunTrace make_trace(std::initializer_list<double> powers, double dt = 0.2,
                    double laser_w = 16.2e-3) {
  RunTrace trace;
  trace.laser_power_w = laser_w;
  int i = 0;
  for (double p : powers) trace.samples.push_back({dt * ++i, p});
  return trace;
}

}  // namespace

TEST_CASE("efficiency normalizes against the laser input") {
  RunTrace trace = make_trace({11.46e-3, 16.2e-3});
  auto eff = efficiency_trace(trace);
  REQUIRE(eff.size() == 2);
  CHECK(eff[0].first == doctest::Approx(0.2));
  CHECK(eff[0].second == doctest::Approx(0.70740740740740738).epsilon(1e-12));
  CHECK(eff[1].second == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("threshold crossing requires a sustained run") {
  // Power pops over threshold once, dips, then stays up.
  RunTrace trace = make_trace(
      {5e-3, 12e-3, 5e-3, 12e-3, 12.5e-3, 13e-3, 13e-3});
  double threshold = 0.70;  // 11.34e-3 W

  auto t1 = time_to_threshold(trace, threshold, 1);
  REQUIRE(t1.has_value());
  CHECK(*t1 == doctest::Approx(0.4));  // the transient counts when sustain=1

  auto t3 = time_to_threshold(trace, threshold, 3);
  REQUIRE(t3.has_value());
  CHECK(*t3 == doctest::Approx(0.8));  // first sample of the sustained run

  auto t4 = time_to_threshold(trace, threshold, 4);
  REQUIRE(t4.has_value());
  CHECK(*t4 == doctest::Approx(0.8));  // the dip resets the count

  CHECK_FALSE(time_to_threshold(trace, 0.90, 1).has_value());
  CHECK_FALSE(time_to_threshold(trace, threshold, 5).has_value());
  CHECK_THROWS_AS(time_to_threshold(trace, threshold, 0), std::invalid_argument);
}

TEST_CASE("stable phase statistics") {
  RunTrace trace;
  trace.laser_power_w = 16.2e-3;
  // 10 samples before the window, then 20 alternating around 10 mW, then one
  // deep dip.
  for (int i = 0; i < 10; ++i) trace.samples.push_back({0.2 * (i + 1), 1e-3});
  double t = 2.0;
  for (int i = 0; i < 20; ++i) {
    t += 0.2;
    trace.samples.push_back({t, (i % 2 == 0) ? 10.1e-3 : 9.9e-3});
  }
  t += 0.2;
  trace.samples.push_back({t, 1e-3});  // > 3 sd below the mean

  StablePhaseStats st = stable_phase_stats(trace, 2.1);
  CHECK(st.sample_count == 21);
  // Hand-computed over the 21 window samples.
  double mean = (10 * 10.1e-3 + 10 * 9.9e-3 + 1e-3) / 21.0;
  CHECK(st.mean_w == doctest::Approx(mean).epsilon(1e-12));
  double ss = 0.0;
  for (int i = 0; i < 20; ++i) {
    double v = (i % 2 == 0) ? 10.1e-3 : 9.9e-3;
    ss += (v - mean) * (v - mean);
  }
  ss += (1e-3 - mean) * (1e-3 - mean);
  CHECK(st.sd_w == doctest::Approx(std::sqrt(ss / 20.0)).epsilon(1e-12));
  CHECK(st.relative_sd == doctest::Approx(st.sd_w / st.mean_w).epsilon(1e-12));
  CHECK(st.overshoot_count == 1);

  // Too few samples in the window.
  CHECK_THROWS_AS(stable_phase_stats(trace, t - 0.5), std::invalid_argument);
}

TEST_CASE("first stable time scans a trailing window") {
  RunTrace trace;
  // Ten noisy samples, then ten steady ones.
  for (int i = 0; i < 10; ++i)
    trace.samples.push_back({0.2 * (i + 1), (i % 2 == 0) ? 5e-3 : 15e-3});
  for (int i = 0; i < 10; ++i)
    trace.samples.push_back({0.2 * (i + 11), 12e-3});
  auto t = first_stable_time(trace, 5, 0.01);
  REQUIRE(t.has_value());
  // Window of five identical samples first completes at sample 15.
  CHECK(*t == doctest::Approx(0.2 * 15));
  CHECK_FALSE(first_stable_time(trace, 21, 0.01).has_value());
  CHECK_THROWS_AS(first_stable_time(trace, 1, 0.01), std::invalid_argument);
}

TEST_CASE("decay fit recovers an exact ceiling") {
  const double waist = 1.625e-3, lambda = 780e-9, ceiling = 0.8;
  CouplingModel model{ceiling, waist, lambda};
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 20; ++i) {
    double theta = 3e-4 * i / 19.0;
    pts.push_back({theta, angular_efficiency(model, theta)});
  }
  DecayFit fit = fit_decay_model(pts, waist, lambda);
  CHECK(fit.base_efficiency == doctest::Approx(ceiling).epsilon(1e-12));
  CHECK(fit.residual_norm < 1e-12);
}

TEST_CASE("decay fit input validation") {
  const double waist = 1.625e-3, lambda = 780e-9;
  std::vector<std::pair<double, double>> few = {
      {0.0, 0.8}, {1e-4, 0.5}, {2e-4, 0.2}, {3e-4, 0.05}};
  CHECK_THROWS_AS(fit_decay_model(few, waist, lambda), std::invalid_argument);

  std::vector<std::pair<double, double>> nonpos = {
      {0.0, 0.8}, {1e-4, 0.5}, {2e-4, 0.2}, {3e-4, 0.05}, {4e-4, 0.0}};
  CHECK_THROWS_AS(fit_decay_model(nonpos, waist, lambda), std::invalid_argument);

  std::vector<std::pair<double, double>> flat = {
      {1e-4, 0.5}, {1e-4, 0.5}, {1e-4, 0.5}, {1e-4, 0.5}, {1e-4, 0.5}};
  CHECK_THROWS_AS(fit_decay_model(flat, waist, lambda), std::invalid_argument);
}

TEST_CASE("angle trajectory inverts the coupling law") {
  CouplingModel model{0.8, 1.625e-3, 780e-9};
  RunTrace trace;
  trace.laser_power_w = 16.2e-3;
  double theta_in = 1.2e-4;
  trace.samples.push_back({0.2, 16.2e-3 * angular_efficiency(model, theta_in)});
  trace.samples.push_back({0.4, 16.2e-3 * 0.8});   // exactly at the ceiling
  trace.samples.push_back({0.6, 16.2e-3 * 0.95});  // above it: clamps to zero
  trace.samples.push_back({0.8, 0.0});             // skipped
  trace.samples.push_back({1.0, -1e-6});           // skipped

  AngleTrajectory traj = angle_trajectory(trace, model);
  REQUIRE(traj.points.size() == 3);
  CHECK(traj.points[0].first == doctest::Approx(0.2));
  CHECK(traj.points[0].second == doctest::Approx(theta_in).epsilon(1e-9));
  CHECK(traj.points[1].second == doctest::Approx(0.0));
  CHECK(traj.points[2].second == doctest::Approx(0.0));
  CHECK(traj.skipped == 2);
}

TEST_CASE("trace csv round trip") {
  std::vector<PowerSample> samples = {
      {0.2, 12.3456789e-3}, {0.4, 0.0}, {0.6, 9.87e-12}};
  std::ostringstream out;
  write_trace_csv(samples, out);
  CHECK(out.str().rfind("time_s,power_w\n", 0) == 0);

  std::istringstream in(out.str());
  std::vector<PowerSample> back = read_trace_csv(in);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].time_s == samples[i].time_s);
    CHECK(back[i].power_w == samples[i].power_w);
  }
}

TEST_CASE("trace reader accepts wider logs by header lookup") {
  std::istringstream in(
      "time_s,channel,position_steps,power_w,stage,event\n"
      "0.2,1,10,0.0123,0,move\n"
      "0.4,2,-5,0.0124,0,move\n");
  std::vector<PowerSample> trace = read_trace_csv(in);
  REQUIRE(trace.size() == 2);
  CHECK(trace[0].time_s == doctest::Approx(0.2));
  CHECK(trace[0].power_w == doctest::Approx(0.0123));
  CHECK(trace[1].power_w == doctest::Approx(0.0124));
}

TEST_CASE("trace reader rejects missing columns and short rows") {
  std::istringstream no_power("time_s,value\n0.2,1.0\n");
  CHECK_THROWS_AS(read_trace_csv(no_power), std::runtime_error);
  std::istringstream short_row("time_s,power_w\n0.2\n");
  CHECK_THROWS_AS(read_trace_csv(short_row), std::runtime_error);
}

TEST_CASE("pairs csv golden output") {
  std::ostringstream out;
  write_pairs_csv({{1.0, 0.5}, {2.5, 0.25}}, "theta_rad,efficiency", out);
  CHECK(out.str() == "theta_rad,efficiency\n1,0.5\n2.5,0.25\n");
}
