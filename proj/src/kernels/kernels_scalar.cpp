#include "netlineq/kernels.hpp"

namespace netlineq::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void gemv_scalar(std::size_t rows, std::size_t cols, double alpha,
                 const double* a, const double* x, double beta, double* y) {
  if (beta == 0.0) {
    for (std::size_t i = 0; i < rows; ++i) y[i] = 0.0;
  } else if (beta != 1.0) {
    for (std::size_t i = 0; i < rows; ++i) y[i] *= beta;
  }
  for (std::size_t j = 0; j < cols; ++j) {
    const double s = alpha * x[j];
    const double* col = a + j * rows;
    for (std::size_t i = 0; i < rows; ++i) y[i] += s * col[i];
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar", dot_scalar, axpy_scalar, scal_scalar,
                       gemv_scalar};
  return ops;
}

}  // namespace netlineq::kernels
