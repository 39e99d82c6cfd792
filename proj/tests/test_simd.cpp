#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "tripod/model.hpp"
#include "tripod/simd/ops.hpp"
#include "tripod/solver.hpp"

using namespace tripod;

namespace {

simd::GaussStepConstants sample_constants() {
  const Grid grid = Grid::uniform(3.0, 1.7, 16, 8);
  simd::GaussStepConstants k;
  const double h = grid.time_step();
  const double hz = grid.space_step();
  const std::complex<double> mu(0.25, 1.7320508075688772 / 12.0);
  const std::complex<double> hmo = h * mu * 0.9;
  const std::complex<double> beta = 1.0 + hmo * hmo;
  const std::complex<double> gamma = h * mu * 1.1 * 1.1;
  const std::complex<double> invD = 1.0 / (beta + gamma * hz / 2.0);
  k.om = 0.9;
  k.g = 1.1;
  k.g2hz = 1.1 * 1.1 * hz;
  k.g2hz_half = k.g2hz / 2.0;
  k.rho = 2.0 - 1.7320508075688772;
  k.inv_rho = 1.0 / k.rho;
  k.half_h = h / 2.0;
  k.hmo_re = hmo.real();
  k.hmo_im = hmo.imag();
  k.ghz_re = (gamma * hz).real();
  k.ghz_im = (gamma * hz).imag();
  k.invD_re = invD.real();
  k.invD_im = invD.imag();
  k.alpha1 = h * 0.25;
  k.beta1 = h * (0.25 - 1.7320508075688772 / 6.0) / k.rho;
  k.alpha2 = h * (0.25 + 1.7320508075688772 / 6.0);
  k.beta2 = h * 0.25 / k.rho;
  return k;
}

struct StepBuffers {
  std::vector<double> b, c, a1, a2, sum_c, su_re, su_im, z1, z2;
  StepBuffers(std::size_t n_z, std::size_t m, std::mt19937_64& rng)
      : b(n_z * m), c(n_z * m), a1(m), a2(m), sum_c(m, 0.0), su_re(m, 0.0),
        su_im(m, 0.0), z1(m, 0.0), z2(m, 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : b) v = normal(rng);
    for (auto& v : c) v = normal(rng);
    for (auto& v : a1) v = normal(rng);
    for (auto& v : a2) v = normal(rng);
  }
};

}  // namespace

TEST_CASE("dispatch returns a usable ops table") {
  const auto& ops = simd::active();
  CHECK((std::string(ops.name) == "scalar" || std::string(ops.name) == "avx2"));
  CHECK(ops.gauss_step != nullptr);
}

TEST_CASE("avx2 gauss step is bit-identical to the scalar reference") {
  const simd::Ops* avx2 = simd::avx2_ops();
  if (avx2 == nullptr) return;  // not available on this machine
  const auto k = sample_constants();
  std::mt19937_64 rng(42);
  for (std::size_t m : {1u, 3u, 4u, 5u, 8u, 17u, 64u}) {
    for (std::size_t n_z : {2u, 7u, 32u}) {
      StepBuffers ref(n_z, m, rng);
      StepBuffers alt = ref;
      for (int step = 0; step < 5; ++step) {
        std::fill(ref.sum_c.begin(), ref.sum_c.end(), 0.0);
        std::fill(ref.su_re.begin(), ref.su_re.end(), 0.0);
        std::fill(ref.su_im.begin(), ref.su_im.end(), 0.0);
        std::fill(alt.sum_c.begin(), alt.sum_c.end(), 0.0);
        std::fill(alt.su_re.begin(), alt.su_re.end(), 0.0);
        std::fill(alt.su_im.begin(), alt.su_im.end(), 0.0);
        simd::scalar_ops().gauss_step(k, n_z, m, ref.a1.data(), ref.a2.data(),
                                      ref.b.data(), ref.c.data(),
                                      ref.sum_c.data(), ref.su_re.data(),
                                      ref.su_im.data(), ref.z1.data(),
                                      ref.z2.data());
        avx2->gauss_step(k, n_z, m, alt.a1.data(), alt.a2.data(), alt.b.data(),
                         alt.c.data(), alt.sum_c.data(), alt.su_re.data(),
                         alt.su_im.data(), alt.z1.data(), alt.z2.data());
      }
      CHECK(ref.b == alt.b);
      CHECK(ref.c == alt.c);
      CHECK(ref.z1 == alt.z1);
      CHECK(ref.z2 == alt.z2);
    }
  }
}

TEST_CASE("column results do not depend on the batch they ran in") {
  // run a column alone and embedded in a wider batch; results must match
  // bit for bit (this is what makes worker-count determinism trivial)
  const auto k = sample_constants();
  const std::size_t n_z = 8;
  std::mt19937_64 rng(7);
  StepBuffers wide(n_z, 6, rng);
  // column 2 of the wide batch, extracted
  std::vector<double> b1(n_z), c1(n_z), a11(1), a21(1);
  for (std::size_t row = 0; row < n_z; ++row) {
    b1[row] = wide.b[row * 6 + 2];
    c1[row] = wide.c[row * 6 + 2];
  }
  a11[0] = wide.a1[2];
  a21[0] = wide.a2[2];
  std::vector<double> sum_c(1, 0.0), su_re(1, 0.0), su_im(1, 0.0), z1(1, 0.0),
      z2(1, 0.0);
  const auto& ops = simd::active();
  ops.gauss_step(k, n_z, 6, wide.a1.data(), wide.a2.data(), wide.b.data(),
                 wide.c.data(), wide.sum_c.data(), wide.su_re.data(),
                 wide.su_im.data(), wide.z1.data(), wide.z2.data());
  ops.gauss_step(k, n_z, 1, a11.data(), a21.data(), b1.data(), c1.data(),
                 sum_c.data(), su_re.data(), su_im.data(), z1.data(),
                 z2.data());
  for (std::size_t row = 0; row < n_z; ++row) {
    CHECK(wide.b[row * 6 + 2] == b1[row]);
    CHECK(wide.c[row * 6 + 2] == c1[row]);
  }
  CHECK(wide.z1[2] == z1[0]);
  CHECK(wide.z2[2] == z2[0]);
}

TEST_CASE("axpy, dot and weighted_norm2 match naive references") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t n : {1u, 2u, 5u, 31u, 64u, 129u}) {
    std::vector<double> x(n), y(n), w(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = normal(rng);
      y[i] = normal(rng);
      im[i] = normal(rng);
      w[i] = std::abs(normal(rng)) + 0.1;
    }
    const auto& ops = simd::active();

    std::vector<double> dst = y;
    ops.axpy(dst.data(), x.data(), 0.7, n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(dst[i] == y[i] + 0.7 * x[i]);
    }

    double ref_dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref_dot += x[i] * y[i];
    CHECK(ops.dot(x.data(), y.data(), n) ==
          doctest::Approx(ref_dot).epsilon(1e-13));

    double ref_n2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ref_n2 += w[i] * (x[i] * x[i] + im[i] * im[i]);
    }
    CHECK(ops.weighted_norm2(w.data(), x.data(), im.data(), n) ==
          doctest::Approx(ref_n2).epsilon(1e-13));
    double ref_r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref_r2 += w[i] * x[i] * x[i];
    CHECK(ops.weighted_norm2(w.data(), x.data(), nullptr, n) ==
          doctest::Approx(ref_r2).epsilon(1e-13));
  }
}
