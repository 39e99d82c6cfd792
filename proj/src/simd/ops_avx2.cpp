// AVX2 variants of the batched kernels. Compiled with -mavx2; selected at
// runtime only when the CPU reports AVX2. Elementwise arithmetic keeps the
// scalar path's operation order and avoids FMA so per-column results are
// bit-identical to the reference; only the dot/norm reductions reassociate.

#include "tripod/simd/ops.hpp"

#if defined(TRIPOD_HAVE_AVX2)

#include <immintrin.h>

namespace tripod::simd {
namespace {

void gauss_step_avx2(const GaussStepConstants& k, std::size_t n_z,
                     std::size_t m, const double* a1, const double* a2,
                     double* b, double* c, double* sum_c, double* su_re,
                     double* su_im, double* z1_acc, double* z2_acc) {
  const std::size_t mv = m - m % 4;
  const __m256d om = _mm256_set1_pd(k.om);
  const __m256d neg_om = _mm256_set1_pd(-k.om);
  const __m256d g2hz = _mm256_set1_pd(k.g2hz);
  const __m256d g2hz_half = _mm256_set1_pd(k.g2hz_half);
  const __m256d rho = _mm256_set1_pd(k.rho);
  const __m256d inv_rho = _mm256_set1_pd(k.inv_rho);
  const __m256d g = _mm256_set1_pd(k.g);
  const __m256d hmo_re = _mm256_set1_pd(k.hmo_re);
  const __m256d hmo_im = _mm256_set1_pd(k.hmo_im);
  const __m256d ghz_re = _mm256_set1_pd(k.ghz_re);
  const __m256d ghz_im = _mm256_set1_pd(k.ghz_im);
  const __m256d invD_re = _mm256_set1_pd(k.invD_re);
  const __m256d invD_im = _mm256_set1_pd(k.invD_im);
  const __m256d alpha1 = _mm256_set1_pd(k.alpha1);
  const __m256d beta1 = _mm256_set1_pd(k.beta1);
  const __m256d alpha2 = _mm256_set1_pd(k.alpha2);
  const __m256d beta2 = _mm256_set1_pd(k.beta2);
  const __m256d half_h = _mm256_set1_pd(k.half_h);

  for (std::size_t row = 0; row < n_z; ++row) {
    double* brow = b + row * m;
    double* crow = c + row * m;
    for (std::size_t i = 0; i < mv; i += 4) {
      const __m256d cv = _mm256_loadu_pd(crow + i);
      const __m256d bv = _mm256_loadu_pd(brow + i);
      __m256d sc = _mm256_loadu_pd(sum_c + i);
      const __m256d ab = _mm256_mul_pd(neg_om, cv);
      const __m256d ac = _mm256_sub_pd(
          _mm256_mul_pd(om, bv),
          _mm256_add_pd(_mm256_mul_pd(g2hz, sc), _mm256_mul_pd(g2hz_half, cv)));
      sc = _mm256_add_pd(sc, cv);
      _mm256_storeu_pd(sum_c + i, sc);
      const __m256d fbr = ab;
      const __m256d fbi = _mm256_mul_pd(rho, ab);
      const __m256d fcr =
          _mm256_add_pd(ac, _mm256_mul_pd(g, _mm256_loadu_pd(a1 + i)));
      const __m256d fci = _mm256_mul_pd(
          rho, _mm256_add_pd(ac, _mm256_mul_pd(g, _mm256_loadu_pd(a2 + i))));
      const __m256d rcr = _mm256_add_pd(
          fcr, _mm256_sub_pd(_mm256_mul_pd(hmo_re, fbr),
                             _mm256_mul_pd(hmo_im, fbi)));
      const __m256d rci = _mm256_add_pd(
          fci, _mm256_add_pd(_mm256_mul_pd(hmo_re, fbi),
                             _mm256_mul_pd(hmo_im, fbr)));
      __m256d sur = _mm256_loadu_pd(su_re + i);
      __m256d sui = _mm256_loadu_pd(su_im + i);
      const __m256d tr = _mm256_sub_pd(
          rcr, _mm256_sub_pd(_mm256_mul_pd(ghz_re, sur),
                             _mm256_mul_pd(ghz_im, sui)));
      const __m256d ti = _mm256_sub_pd(
          rci, _mm256_add_pd(_mm256_mul_pd(ghz_re, sui),
                             _mm256_mul_pd(ghz_im, sur)));
      const __m256d ur = _mm256_sub_pd(_mm256_mul_pd(tr, invD_re),
                                       _mm256_mul_pd(ti, invD_im));
      const __m256d ui = _mm256_add_pd(_mm256_mul_pd(tr, invD_im),
                                       _mm256_mul_pd(ti, invD_re));
      sur = _mm256_add_pd(sur, ur);
      sui = _mm256_add_pd(sui, ui);
      _mm256_storeu_pd(su_re + i, sur);
      _mm256_storeu_pd(su_im + i, sui);
      const __m256d ubr = _mm256_sub_pd(
          fbr, _mm256_sub_pd(_mm256_mul_pd(hmo_re, ur),
                             _mm256_mul_pd(hmo_im, ui)));
      const __m256d ubi = _mm256_sub_pd(
          fbi, _mm256_add_pd(_mm256_mul_pd(hmo_re, ui),
                             _mm256_mul_pd(hmo_im, ur)));
      const __m256d z1 = _mm256_add_pd(
          cv, _mm256_add_pd(_mm256_mul_pd(alpha1, ur),
                            _mm256_mul_pd(beta1, ui)));
      const __m256d z2 = _mm256_add_pd(
          cv, _mm256_add_pd(_mm256_mul_pd(alpha2, ur),
                            _mm256_mul_pd(beta2, ui)));
      _mm256_storeu_pd(z1_acc + i,
                       _mm256_add_pd(_mm256_loadu_pd(z1_acc + i), z1));
      _mm256_storeu_pd(z2_acc + i,
                       _mm256_add_pd(_mm256_loadu_pd(z2_acc + i), z2));
      _mm256_storeu_pd(
          brow + i,
          _mm256_add_pd(bv, _mm256_mul_pd(half_h,
                                          _mm256_add_pd(
                                              ubr, _mm256_mul_pd(inv_rho, ubi)))));
      _mm256_storeu_pd(
          crow + i,
          _mm256_add_pd(cv, _mm256_mul_pd(half_h,
                                          _mm256_add_pd(
                                              ur, _mm256_mul_pd(inv_rho, ui)))));
    }
    // remainder lanes: same expressions as the scalar reference
    for (std::size_t i = mv; i < m; ++i) {
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

void axpy_avx2(double* dst, const double* x, double a, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const std::size_t nv = n - n % 4;
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d d = _mm256_loadu_pd(dst + i);
    const __m256d xv = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(dst + i, _mm256_add_pd(d, _mm256_mul_pd(av, xv)));
  }
  for (std::size_t i = nv; i < n; ++i) dst[i] += a * x[i];
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_pd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t nv = n - n % 4;
  for (std::size_t i = 0; i < nv; i += 4) {
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double r = hsum(acc);
  for (std::size_t i = nv; i < n; ++i) r += x[i] * y[i];
  return r;
}

double weighted_norm2_avx2(const double* w, const double* re, const double* im,
                           std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t nv = n - n % 4;
  if (im == nullptr) {
    for (std::size_t i = 0; i < nv; i += 4) {
      const __m256d r = _mm256_loadu_pd(re + i);
      acc = _mm256_add_pd(
          acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(r, r)));
    }
    double s = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) s += w[i] * re[i] * re[i];
    return s;
  }
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d r = _mm256_loadu_pd(re + i);
    const __m256d q = _mm256_loadu_pd(im + i);
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(w + i),
                           _mm256_add_pd(_mm256_mul_pd(r, r),
                                         _mm256_mul_pd(q, q))));
  }
  double s = hsum(acc);
  for (std::size_t i = nv; i < n; ++i) {
    s += w[i] * (re[i] * re[i] + im[i] * im[i]);
  }
  return s;
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace

const Ops* avx2_ops() {
  static const Ops ops{"avx2", gauss_step_avx2, axpy_avx2, dot_avx2,
                       weighted_norm2_avx2};
  static const bool ok = cpu_has_avx2();
  return ok ? &ops : nullptr;
}

}  // namespace tripod::simd

#else  // !TRIPOD_HAVE_AVX2

namespace tripod::simd {
const Ops* avx2_ops() { return nullptr; }
}  // namespace tripod::simd

#endif
