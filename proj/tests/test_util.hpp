#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "tripod/model.hpp"

namespace tripod::test {

/// Deterministic smooth envelope: low-order sine series with coefficients
/// drawn from the given generator.
inline FieldEnvelope sine_series(const Grid& grid, std::mt19937_64& rng,
                                 bool complex_valued = false) {
  std::normal_distribution<double> normal(0.0, 1.0);
  FieldEnvelope env(grid);
  for (int mode = 1; mode <= 6; ++mode) {
    const double cr = normal(rng);
    const double ci = complex_valued ? normal(rng) : 0.0;
    for (std::size_t j = 0; j < grid.n_t(); ++j) {
      const double s = std::sin(mode * std::numbers::pi *
                                grid.time_nodes()[j] / grid.duration());
      env.samples[j] += Complex(cr * s, ci * s);
    }
  }
  return env;
}

inline double rel_l2_error(const FieldEnvelope& a, const FieldEnvelope& b) {
  double diff2 = 0.0, ref2 = 0.0;
  const auto& w = a.grid.time_weights();
  for (std::size_t j = 0; j < a.samples.size(); ++j) {
    diff2 += w[j] * std::norm(a.samples[j] - b.samples[j]);
    ref2 += w[j] * std::norm(b.samples[j]);
  }
  return ref2 > 0.0 ? std::sqrt(diff2 / ref2) : std::sqrt(diff2);
}

}  // namespace tripod::test
