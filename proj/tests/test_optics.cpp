#include "doctest.h"

#include <cmath>

#include "fiberalign/optics.hpp"
#include "fiberalign/units.hpp"

using namespace fiberalign;

namespace {
const CouplingModel kSmfModel{0.8, 1.625e-3, 780e-9};
}

TEST_CASE("waist mismatch closed form") {
  // (2 * 1 * 2 / (1 + 4))^2 = 0.8^2
  CHECK(waist_mismatch_efficiency(1e-3, 2e-3) == doctest::Approx(0.64).epsilon(1e-12));
  CHECK(waist_mismatch_efficiency(2e-3, 1e-3) == doctest::Approx(0.64).epsilon(1e-12));
  CHECK(waist_mismatch_efficiency(1.3e-3, 1.3e-3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("numeric overlap matches the closed form across waist ratios") {
  for (int i = 0; i < 20; ++i) {
    double ratio = 0.5 + 1.5 * i / 19.0;
    GaussianBeam a{1.0, 1e-3, 780e-9};
    GaussianBeam b{1.0, ratio * 1e-3, 780e-9};
    double numeric = mode_overlap_numeric(a, b);
    double closed = waist_mismatch_efficiency(a.waist_radius_m, b.waist_radius_m);
    CAPTURE(ratio);
    CHECK(std::abs(numeric - closed) < 1e-9);
  }
}

TEST_CASE("numeric overlap is independent of field amplitudes") {
  GaussianBeam a{1.0, 1e-3, 780e-9};
  GaussianBeam b{1.0, 2e-3, 780e-9};
  double base = mode_overlap_numeric(a, b);
  a.amplitude = 7.5;
  b.amplitude = 0.03;
  CHECK(mode_overlap_numeric(a, b) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("numeric overlap guards its grid parameters") {
  GaussianBeam a{1.0, 1e-3, 780e-9};
  GaussianBeam b{1.0, 2e-3, 780e-9};
  CHECK_THROWS_AS(mode_overlap_numeric(a, b, 7.9e-3, 256), std::invalid_argument);
  CHECK_THROWS_AS(mode_overlap_numeric(a, b, 8e-3, 127), std::invalid_argument);
  CHECK_NOTHROW(mode_overlap_numeric(a, b, 8e-3, 128));
}

TEST_CASE("beam and model validation") {
  GaussianBeam bad{1.0, -1e-3, 780e-9};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS((GaussianBeam{1.0, 1e-3, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((CouplingModel{0.0, 1.625e-3, 780e-9}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS((CouplingModel{1.2, 1.625e-3, 780e-9}).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(kSmfModel.validate());
}

TEST_CASE("angular rolloff reference points") {
  CHECK(angular_efficiency(kSmfModel, 0.0) == doctest::Approx(0.8).epsilon(1e-12));
  // 100 urad off axis costs about 35% of the peak for these parameters.
  CHECK(angular_efficiency(kSmfModel, 1e-4) ==
        doctest::Approx(0.5212568).epsilon(1e-5));
  CHECK(angular_efficiency(kSmfModel, -1e-4) ==
        doctest::Approx(angular_efficiency(kSmfModel, 1e-4)).epsilon(1e-12));
}

TEST_CASE("e-folding angle") {
  double efold = kSmfModel.efold_angle_rad();
  CHECK(efold == doctest::Approx(1.527887595e-4).epsilon(1e-9));
  CHECK(angular_efficiency(kSmfModel, efold) ==
        doctest::Approx(0.8 / std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("angle inversion round trip") {
  double efold = kSmfModel.efold_angle_rad();
  for (double scale : {0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0}) {
    double theta = scale * efold;
    double eta = angular_efficiency(kSmfModel, theta);
    CAPTURE(scale);
    CHECK(invert_angle(kSmfModel, eta) == doctest::Approx(theta).epsilon(1e-9));
  }
}

TEST_CASE("angle inversion domain") {
  CHECK(invert_angle(kSmfModel, 0.8) == doctest::Approx(0.0));
  CHECK_THROWS_AS(invert_angle(kSmfModel, 0.0), std::domain_error);
  CHECK_THROWS_AS(invert_angle(kSmfModel, -0.1), std::domain_error);
  CHECK_THROWS_AS(invert_angle(kSmfModel, 0.81), std::domain_error);
}

TEST_CASE("field profile") {
  GaussianBeam a{2.0, 1e-3, 780e-9};
  CHECK(a.field_at(0.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.field_at(1e-3) == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-12));
}
