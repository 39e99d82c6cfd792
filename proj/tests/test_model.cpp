#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "tripod/model.hpp"

using namespace tripod;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHalfInvSqrt2 = 0.70710678118654752;
}  // namespace

TEST_CASE("grid weights are positive and sum to the interval lengths") {
  const Grid g = Grid::uniform(10.0 / 3.0, 1.7, 34, 29);
  double ts = std::accumulate(g.time_weights().begin(), g.time_weights().end(), 0.0);
  double zs = std::accumulate(g.space_weights().begin(), g.space_weights().end(), 0.0);
  CHECK(std::abs(ts - g.duration()) <= 1e-12 * g.duration());
  CHECK(std::abs(zs - g.length()) <= 1e-12 * g.length());
  for (double w : g.time_weights()) CHECK(w > 0.0);
  for (double w : g.space_weights()) CHECK(w > 0.0);
  // nodes strictly increasing inside (0, T)
  for (std::size_t j = 1; j < g.n_t(); ++j) {
    CHECK(g.time_nodes()[j] > g.time_nodes()[j - 1]);
  }
  CHECK(g.time_nodes().front() > 0.0);
  CHECK(g.time_nodes().back() < g.duration());
}

TEST_CASE("grid rejects bad dimensions") {
  CHECK_THROWS_AS(Grid::uniform(0.0, 1.0, 4, 4), InvalidGrid);
  CHECK_THROWS_AS(Grid::uniform(1.0, -1.0, 4, 4), InvalidGrid);
  CHECK_THROWS_AS(Grid::uniform(1.0, 1.0, 0, 4), InvalidGrid);
  CHECK_THROWS_AS(Grid::uniform(1.0, 1.0, 5, 4), InvalidGrid);  // odd n_t
  CHECK_THROWS_AS(Grid::uniform(1.0, 1.0, 4, 1), InvalidGrid);
  CHECK_NOTHROW(Grid::uniform(1.0, 1.0, 2, 2));
}

TEST_CASE("validate_config accepts the swap endpoint drive") {
  const Grid g = Grid::uniform(2.0, 1.0, 8, 8);
  DriveSetting d;  // (1,0,0,1)
  const auto cfg = validate_config(PhysicalParams{}, g, d);
  CHECK(cfg.unitary_mode);
}

TEST_CASE("validate_config rejects a drive violating the Rabi normalization") {
  const Grid g = Grid::uniform(2.0, 1.0, 8, 8);
  DriveSetting d;
  d.omega_r1 = 0.8;
  d.omega_r2 = 0.8;
  CHECK_THROWS_AS(validate_config(PhysicalParams{}, g, d), InvalidDrive);
  try {
    validate_config(PhysicalParams{}, g, d);
  } catch (const InvalidDrive& e) {
    CHECK(!e.violations().empty());
  }
}

TEST_CASE("validate_config accepts the 50/50 drive") {
  const Grid g = Grid::uniform(2.0, 1.0, 8, 8);
  DriveSetting d;
  d.omega_r1 = d.omega_r2 = d.omega_r3 = d.omega_r4 = kHalfInvSqrt2;
  const auto cfg = validate_config(PhysicalParams{}, g, d);
  CHECK(cfg.unitary_mode);
}

TEST_CASE("validation reports every violated invariant") {
  Grid g;  // default-constructed: everything wrong
  auto v = config_violations(PhysicalParams{-1.0, 0.0}, g, DriveSetting{});
  CHECK(v.size() >= 4);
}

TEST_CASE("validation is total over corrupted drives") {
  const Grid g = Grid::uniform(2.0, 1.0, 8, 8);
  for (double bad : {0.3, -1.0, 2.0, 0.999}) {
    DriveSetting d;
    d.omega_r1 = bad;
    bool ok_or_specific = false;
    try {
      validate_config(PhysicalParams{}, g, d);
      ok_or_specific = std::abs(bad * bad - 1.0) <= 1e-12;
    } catch (const ConfigError&) {
      ok_or_specific = true;
    }
    CHECK(ok_or_specific);
  }
}

TEST_CASE("theta_to_rabi endpoints and scaling") {
  const auto d0 = theta_to_rabi(0.0, 1.0);
  CHECK(d0.omega_r1 == 1.0);
  CHECK(d0.omega_r2 == 0.0);
  CHECK(d0.omega_r3 == 0.0);
  CHECK(d0.omega_r4 == 1.0);

  const auto d45 = theta_to_rabi(kPi / 4.0, 1.0);
  CHECK(d45.omega_r1 == doctest::Approx(kHalfInvSqrt2).epsilon(1e-14));
  CHECK(d45.omega_r2 == doctest::Approx(kHalfInvSqrt2).epsilon(1e-14));
  CHECK(d45.omega_r3 == doctest::Approx(kHalfInvSqrt2).epsilon(1e-14));
  CHECK(d45.omega_r4 == doctest::Approx(kHalfInvSqrt2).epsilon(1e-14));

  const auto d60 = theta_to_rabi(kPi / 3.0, 2.0);
  CHECK(d60.omega_r1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d60.omega_r2 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(d60.omega_r3 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(d60.omega_r4 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d60.omega_w1 == 2.0);

  CHECK_THROWS_AS(theta_to_rabi(-0.1, 1.0), OutOfRangeAngle);
  CHECK_THROWS_AS(theta_to_rabi(kPi / 2.0 + 0.1, 1.0), OutOfRangeAngle);
}

TEST_CASE("theta_to_rabi satisfies the Rabi normalization across the range") {
  for (int i = 0; i <= 40; ++i) {
    const double theta = (kPi / 2.0) * i / 40.0;
    const auto d = theta_to_rabi(theta, 1.3);
    const double s1 = d.omega_r1 * d.omega_r1 + d.omega_r2 * d.omega_r2;
    const double s2 = d.omega_r3 * d.omega_r3 + d.omega_r4 * d.omega_r4;
    CHECK(std::abs(s1 - 1.69) <= 1e-12 * 1.69);
    CHECK(std::abs(s2 - 1.69) <= 1e-12 * 1.69);
    CHECK(d.unitary_mode(1.3));
  }
}

TEST_CASE("rabi_to_theta inverts theta_to_rabi at lambda = 1") {
  for (int i = 0; i <= 20; ++i) {
    const double theta = (kPi / 2.0) * i / 20.0;
    const auto angle = rabi_to_theta(theta_to_rabi(theta, 1.0), 1.0, 1.0);
    CHECK(std::abs(angle.direction - theta) <= 1e-12);
    CHECK(angle.contraction == 1.0);
  }
}

TEST_CASE("rabi_to_theta separates direction and contraction") {
  const auto a = rabi_to_theta(theta_to_rabi(0.0, 1.0), 1.0, 0.81);
  CHECK(a.direction == 0.0);
  CHECK(a.contraction == doctest::Approx(0.9).epsilon(1e-14));

  const auto b = rabi_to_theta(theta_to_rabi(kPi / 4.0, 1.0), 1.0, 0.9);
  CHECK(b.direction == doctest::Approx(kPi / 4.0).epsilon(1e-14));
  CHECK(b.contraction == doctest::Approx(std::sqrt(0.9)).epsilon(1e-14));

  CHECK_THROWS_AS(rabi_to_theta(theta_to_rabi(0.0, 1.0), 1.0, 1.5),
                  InvalidLambda);
  DriveSetting skew;
  skew.omega_r3 = 0.6;
  skew.omega_r4 = 0.8;
  CHECK_THROWS_AS(rabi_to_theta(skew, 1.0, 1.0), InvalidDrive);
}

TEST_CASE("envelope norm uses the grid weights") {
  const Grid g = Grid::uniform(4.0, 1.0, 64, 8);
  FieldEnvelope env(g);
  for (auto& s : env.samples) s = Complex(1.0, 0.0);
  CHECK(env.norm2() == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(FieldEnvelope(g, std::vector<Complex>(5)), GridMismatch);
}

TEST_CASE("zero coupling is a legal degenerate configuration") {
  const Grid g = Grid::uniform(2.0, 1.0, 8, 8);
  CHECK_NOTHROW(validate_config(PhysicalParams{0.0, 1.0}, g, DriveSetting{}));
  CHECK_THROWS_AS(validate_config(PhysicalParams{1.0, 0.0}, g, DriveSetting{}),
                  InvalidParams);
}
