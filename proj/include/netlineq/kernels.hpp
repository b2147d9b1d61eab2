#pragma once

#include <cstddef>

namespace netlineq::kernels {

// Dense double-precision kernels for the integrator hot path. Matrices are
// column-major and fully packed (lda == rows), matching Eigen's default
// storage, so Eigen blocks can be handed over via .data().
//
// Two implementations exist: a scalar reference and an AVX2/FMA variant.
// active() picks the best one supported by the CPU at first use; the
// NETLINEQ_KERNEL environment variable (values "scalar" or "avx2") forces a
// specific one, which the equivalence tests rely on.
struct Ops {
  const char* name;

  // sum_i x[i]*y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);

  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // x *= a
  void (*scal)(double a, double* x, std::size_t n);

  // y = alpha*A*x + beta*y with A column-major rows x cols.
  // beta == 0 overwrites y (no NaN propagation from stale contents).
  void (*gemv)(std::size_t rows, std::size_t cols, double alpha,
               const double* a, const double* x, double beta, double* y);
};

const Ops& scalar_ops();

// nullptr when the build target or the running CPU lacks AVX2+FMA.
const Ops* avx2_ops();

const Ops& active();

}  // namespace netlineq::kernels
