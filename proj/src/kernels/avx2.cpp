// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; only reached after a
// runtime CPU check (see dispatch.cpp).
//
// squared_distances / affine / colwise_max_argmax evaluate each output element
// with the same operation sequence as the scalar reference, so they are
// bit-identical to it. row_sqdist and l1_distance reduce in 4/8 partial lanes
// and differ from the reference only by rounding of the reassociated sum.

#include "linereg/kernels/kernels.hpp"

#if LINEREG_KERNELS_HAVE_AVX2

#include <immintrin.h>

#include <cmath>

namespace linereg::kernels::avx2 {

void squared_distances(const double* xs, const double* ys, const double* zs,
                       std::size_t n, double qx, double qy, double qz, double* out) {
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  const __m256d vqz = _mm256_set1_pd(qz);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vqz);
    const __m256d xy = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(out + i, _mm256_add_pd(xy, _mm256_mul_pd(dz, dz)));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    out[i] = (dx * dx + dy * dy) + dz * dz;
  }
}

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

void row_sqdist(const float* rows, std::size_t n, std::size_t dim, const float* q, float* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const float* r = rows + i * dim;
    __m256 acc = _mm256_setzero_ps();
    std::size_t c = 0;
    for (; c + 8 <= dim; c += 8) {
      const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(r + c), _mm256_loadu_ps(q + c));
      acc = _mm256_fmadd_ps(d, d, acc);
    }
    float sum = hsum(acc);
    for (; c < dim; ++c) {
      const float d = r[c] - q[c];
      sum += d * d;
    }
    out[i] = sum;
  }
}

void row_sqdist(const double* rows, std::size_t n, std::size_t dim, const double* q, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = rows + i * dim;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= dim; c += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(r + c), _mm256_loadu_pd(q + c));
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    double sum = hsum(acc);
    for (; c < dim; ++c) {
      const double d = r[c] - q[c];
      sum += d * d;
    }
    out[i] = sum;
  }
}

void affine(const float* x, std::size_t n, std::size_t cin, const float* w, const float* b,
            std::size_t cout, bool relu, float* y) {
  const std::size_t co_vec = cout & ~std::size_t(7);
  const __m256 zero = _mm256_setzero_ps();
  for (std::size_t i = 0; i < n; ++i) {
    const float* xi = x + i * cin;
    float* yi = y + i * cout;
    for (std::size_t co = 0; co < co_vec; co += 8) {
      __m256 acc = _mm256_loadu_ps(b + co);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        acc = _mm256_fmadd_ps(_mm256_set1_ps(xi[ci]), _mm256_loadu_ps(w + ci * cout + co), acc);
      }
      if (relu) acc = _mm256_max_ps(acc, zero);
      _mm256_storeu_ps(yi + co, acc);
    }
    for (std::size_t co = co_vec; co < cout; ++co) {
      float acc = b[co];
      for (std::size_t ci = 0; ci < cin; ++ci) acc = std::fma(xi[ci], w[ci * cout + co], acc);
      yi[co] = (relu && acc < 0.0f) ? 0.0f : acc;
    }
  }
}

void affine(const double* x, std::size_t n, std::size_t cin, const double* w, const double* b,
            std::size_t cout, bool relu, double* y) {
  const std::size_t co_vec = cout & ~std::size_t(3);
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * cin;
    double* yi = y + i * cout;
    for (std::size_t co = 0; co < co_vec; co += 4) {
      __m256d acc = _mm256_loadu_pd(b + co);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        acc = _mm256_fmadd_pd(_mm256_set1_pd(xi[ci]), _mm256_loadu_pd(w + ci * cout + co), acc);
      }
      if (relu) acc = _mm256_max_pd(acc, zero);
      _mm256_storeu_pd(yi + co, acc);
    }
    for (std::size_t co = co_vec; co < cout; ++co) {
      double acc = b[co];
      for (std::size_t ci = 0; ci < cin; ++ci) acc = std::fma(xi[ci], w[ci * cout + co], acc);
      yi[co] = (relu && acc < 0.0) ? 0.0 : acc;
    }
  }
}

void colwise_max_argmax(const float* rows, std::size_t k, std::size_t c, float* out_max,
                        int* out_argmax) {
  const std::size_t c_vec = c & ~std::size_t(7);
  for (std::size_t j = 0; j < c_vec; j += 8) {
    __m256 best = _mm256_loadu_ps(rows + j);
    __m256i best_idx = _mm256_setzero_si256();
    for (std::size_t i = 1; i < k; ++i) {
      const __m256 v = _mm256_loadu_ps(rows + i * c + j);
      const __m256 gt = _mm256_cmp_ps(v, best, _CMP_GT_OQ);  // strict: first max wins
      best = _mm256_blendv_ps(best, v, gt);
      best_idx = _mm256_blendv_epi8(best_idx, _mm256_set1_epi32(static_cast<int>(i)),
                                    _mm256_castps_si256(gt));
    }
    _mm256_storeu_ps(out_max + j, best);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out_argmax + j), best_idx);
  }
  for (std::size_t j = c_vec; j < c; ++j) {
    float best = rows[j];
    int bi = 0;
    for (std::size_t i = 1; i < k; ++i) {
      const float v = rows[i * c + j];
      if (v > best) {
        best = v;
        bi = static_cast<int>(i);
      }
    }
    out_max[j] = best;
    out_argmax[j] = bi;
  }
}

void colwise_max_argmax(const double* rows, std::size_t k, std::size_t c, double* out_max,
                        int* out_argmax) {
  for (std::size_t j = 0; j < c; ++j) {
    double best = rows[j];
    int bi = 0;
    for (std::size_t i = 1; i < k; ++i) {
      const double v = rows[i * c + j];
      if (v > best) {
        best = v;
        bi = static_cast<int>(i);
      }
    }
    out_max[j] = best;
    out_argmax[j] = bi;
  }
}

float l1_distance(const float* a, const float* b, std::size_t n) {
  const __m256 sign_mask = _mm256_set1_ps(-0.0f);
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    acc = _mm256_add_ps(acc, _mm256_andnot_ps(sign_mask, d));
  }
  float sum = hsum(acc);
  for (; i < n; ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

double l1_distance(const double* a, const double* b, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

}  // namespace linereg::kernels::avx2

#endif  // LINEREG_KERNELS_HAVE_AVX2
