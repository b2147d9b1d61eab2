#include "netlineq/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace netlineq::kernels {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d high = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, high));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                           acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yi = _mm256_loadu_pd(y + i);
    yi = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yi);
    _mm256_storeu_pd(y + i, yi);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_avx2(double a, double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void gemv_avx2(std::size_t rows, std::size_t cols, double alpha,
               const double* a, const double* x, double beta, double* y) {
  if (beta == 0.0) {
    for (std::size_t i = 0; i < rows; ++i) y[i] = 0.0;
  } else if (beta != 1.0) {
    scal_avx2(beta, y, rows);
  }
  // Two columns per pass for instruction-level parallelism.
  std::size_t j = 0;
  for (; j + 2 <= cols; j += 2) {
    const double* c0 = a + j * rows;
    const double* c1 = c0 + rows;
    const double s0 = alpha * x[j];
    const double s1 = alpha * x[j + 1];
    const __m256d s0v = _mm256_set1_pd(s0);
    const __m256d s1v = _mm256_set1_pd(s1);
    std::size_t i = 0;
    for (; i + 4 <= rows; i += 4) {
      __m256d yi = _mm256_loadu_pd(y + i);
      yi = _mm256_fmadd_pd(s0v, _mm256_loadu_pd(c0 + i), yi);
      yi = _mm256_fmadd_pd(s1v, _mm256_loadu_pd(c1 + i), yi);
      _mm256_storeu_pd(y + i, yi);
    }
    for (; i < rows; ++i) {
      y[i] += s0 * c0[i];
      y[i] += s1 * c1[i];
    }
  }
  if (j < cols) {
    axpy_avx2(alpha * x[j], a + j * rows, y, rows);
  }
}

}  // namespace

const Ops* avx2_ops() {
  if (!(__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))) {
    return nullptr;
  }
  static const Ops ops{"avx2", dot_avx2, axpy_avx2, scal_avx2, gemv_avx2};
  return &ops;
}

}  // namespace netlineq::kernels

#else  // non-x86 build

namespace netlineq::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace netlineq::kernels

#endif
