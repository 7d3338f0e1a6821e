#include <cmath>

#include "rilco/kernels.hpp"

namespace rilco::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void lerp_scalar(double t, const double* a, const double* b, double* out, std::size_t n) {
  const double s = 1.0 - t;
  for (std::size_t i = 0; i < n; ++i) out[i] = s * a[i] + t * b[i];
}

void mul_add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m || std::isnan(d)) m = d;
  }
  return m;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar",       dot_scalar,     sum_scalar,
                                 axpy_scalar,    lerp_scalar,    mul_add_scalar,
                                 max_abs_diff_scalar};
  return table;
}

}  // namespace rilco::kernels
