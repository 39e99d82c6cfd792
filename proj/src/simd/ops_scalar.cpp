#include "tripod/simd/ops.hpp"

namespace tripod::simd {
namespace {

// Reference row pass. The AVX2 variant mirrors this expression-for-
// expression (same operation order, no FMA) so both paths produce
// bit-identical per-column results.
void gauss_step_scalar(const GaussStepConstants& k, std::size_t n_z,
                       std::size_t m, const double* a1, const double* a2,
                       double* b, double* c, double* sum_c, double* su_re,
                       double* su_im, double* z1_acc, double* z2_acc) {
  for (std::size_t row = 0; row < n_z; ++row) {
    double* brow = b + row * m;
    double* crow = c + row * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double cv = crow[i];
      const double bv = brow[i];
      const double ab = -k.om * cv;
      const double ac = k.om * bv - (k.g2hz * sum_c[i] + k.g2hz_half * cv);
      sum_c[i] += cv;
      const double fbr = ab;
      const double fbi = k.rho * ab;
      const double fcr = ac + k.g * a1[i];
      const double fci = k.rho * (ac + k.g * a2[i]);
      const double rcr = fcr + (k.hmo_re * fbr - k.hmo_im * fbi);
      const double rci = fci + (k.hmo_re * fbi + k.hmo_im * fbr);
      const double tr = rcr - (k.ghz_re * su_re[i] - k.ghz_im * su_im[i]);
      const double ti = rci - (k.ghz_re * su_im[i] + k.ghz_im * su_re[i]);
      const double ur = tr * k.invD_re - ti * k.invD_im;
      const double ui = tr * k.invD_im + ti * k.invD_re;
      su_re[i] += ur;
      su_im[i] += ui;
      const double ubr = fbr - (k.hmo_re * ur - k.hmo_im * ui);
      const double ubi = fbi - (k.hmo_re * ui + k.hmo_im * ur);
      z1_acc[i] += cv + (k.alpha1 * ur + k.beta1 * ui);
      z2_acc[i] += cv + (k.alpha2 * ur + k.beta2 * ui);
      brow[i] = bv + k.half_h * (ubr + k.inv_rho * ubi);
      crow[i] = cv + k.half_h * (ur + k.inv_rho * ui);
    }
  }
}

void axpy_scalar(double* dst, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double weighted_norm2_scalar(const double* w, const double* re,
                             const double* im, std::size_t n) {
  double acc = 0.0;
  if (im == nullptr) {
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * (re[i] * re[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      acc += w[i] * (re[i] * re[i] + im[i] * im[i]);
    }
  }
  return acc;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar", gauss_step_scalar, axpy_scalar, dot_scalar,
                       weighted_norm2_scalar};
  return ops;
}

}  // namespace tripod::simd
