// Built with -mavx2 -mfma on x86-64; only reached after a runtime CPU check.

#include <cmath>

#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define PARETOFACT_HAVE_AVX2 1
#include <immintrin.h>
#else
#define PARETOFACT_HAVE_AVX2 0
#endif

namespace paretofact::num::kernels::avx2 {

#if PARETOFACT_HAVE_AVX2

namespace {

template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using reg = __m256;
  static constexpr std::size_t width = 8;
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg splat(float v) { return _mm256_set1_ps(v); }
  static reg zero() { return _mm256_setzero_ps(); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static float hsum(reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    __m128 s = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, s);
    s = _mm_add_ss(s, sh);
    return _mm_cvtss_f32(s);
  }
};

template <>
struct Vec<double> {
  using reg = __m256d;
  static constexpr std::size_t width = 4;
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg splat(double v) { return _mm256_set1_pd(v); }
  static reg zero() { return _mm256_setzero_pd(); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static double hsum(reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d h = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, h));
  }
};

// y[0..n) += alpha * x[0..n)
template <typename T>
inline void axpy_row(T alpha, const T* x, T* y, std::size_t n) {
  using V = Vec<T>;
  const auto va = V::splat(alpha);
  std::size_t j = 0;
  for (; j + 2 * V::width <= n; j += 2 * V::width) {
    V::store(y + j, V::fmadd(va, V::load(x + j), V::load(y + j)));
    V::store(y + j + V::width,
             V::fmadd(va, V::load(x + j + V::width), V::load(y + j + V::width)));
  }
  for (; j + V::width <= n; j += V::width) {
    V::store(y + j, V::fmadd(va, V::load(x + j), V::load(y + j)));
  }
  for (; j < n; ++j) y[j] = std::fma(alpha, x[j], y[j]);
}

template <typename T>
inline T dot(const T* x, const T* y, std::size_t n) {
  using V = Vec<T>;
  auto acc0 = V::zero();
  auto acc1 = V::zero();
  std::size_t j = 0;
  for (; j + 2 * V::width <= n; j += 2 * V::width) {
    acc0 = V::fmadd(V::load(x + j), V::load(y + j), acc0);
    acc1 = V::fmadd(V::load(x + j + V::width), V::load(y + j + V::width), acc1);
  }
  for (; j + V::width <= n; j += V::width) {
    acc0 = V::fmadd(V::load(x + j), V::load(y + j), acc0);
  }
  T acc = V::hsum(acc0) + V::hsum(acc1);
  for (; j < n; ++j) acc = std::fma(x[j], y[j], acc);
  return acc;
}

template <typename T>
void gemm(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m * n; ++i) c[i] = T{0};
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      if (av == T{0}) continue;
      axpy_row(av, b + p * n, crow, n);
    }
  }
}

template <typename T>
void gemm_tn_acc(const T* a, const T* g, T* out, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      if (av == T{0}) continue;
      axpy_row(av, grow, out + p * n, n);
    }
  }
}

template <typename T>
void gemm_nt_acc(const T* g, const T* b, T* out, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) out[i * k + p] += dot(grow, b + p * n, n);
  }
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  axpy_row(alpha, x, y, n);
}

double abs_diff_sum_f(const float* x, const float* y, std::size_t n) {
  // Widen before subtracting so each term matches the scalar reference.
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 xv = _mm256_loadu_ps(x + i), yv = _mm256_loadu_ps(y + i);
    const __m256d lo = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(xv)),
                                     _mm256_cvtps_pd(_mm256_castps256_ps128(yv)));
    const __m256d hi = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(xv, 1)),
                                     _mm256_cvtps_pd(_mm256_extractf128_ps(yv, 1)));
    acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign, lo));
    acc1 = _mm256_add_pd(acc1, _mm256_andnot_pd(sign, hi));
  }
  double acc = Vec<double>::hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += std::fabs(static_cast<double>(x[i]) - static_cast<double>(y[i]));
  return acc;
}

double abs_diff_sum_d(const double* x, const double* y, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(
        acc, _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i))));
  }
  double out = Vec<double>::hsum(acc);
  for (; i < n; ++i) out += std::fabs(x[i] - y[i]);
  return out;
}

}  // namespace

bool compiled() { return true; }

template <>
const Table<float>& table<float>() {
  static const Table<float> t{&gemm<float>, &gemm_tn_acc<float>, &gemm_nt_acc<float>,
                              &axpy<float>, &abs_diff_sum_f};
  return t;
}

template <>
const Table<double>& table<double>() {
  static const Table<double> t{&gemm<double>, &gemm_tn_acc<double>, &gemm_nt_acc<double>,
                               &axpy<double>, &abs_diff_sum_d};
  return t;
}

#else

bool compiled() { return false; }

template <>
const Table<float>& table<float>() {
  return scalar::table<float>();
}

template <>
const Table<double>& table<double>() {
  return scalar::table<double>();
}

#endif

}  // namespace paretofact::num::kernels::avx2
