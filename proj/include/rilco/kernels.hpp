#pragma once

// Dense double-precision inner loops shared by the MDP, risk and trainer code.
//
// Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once at first use from CPUID;
// setting RIL_KERNELS=scalar in the environment forces the reference path.
// All spans passed to one call must have equal length.

#include <cstddef>
#include <span>
#include <string_view>

namespace rilco::kernels {

struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = (1 - t) * a + t * b
  void (*lerp)(double t, const double* a, const double* b, double* out, std::size_t n);
  // out += a * b (elementwise)
  void (*mul_add)(const double* a, const double* b, double* out, std::size_t n);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

// The table every public wrapper below dispatches through.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void lerp(double t, std::span<const double> a, std::span<const double> b,
                 std::span<double> out) {
  active().lerp(t, a.data(), b.data(), out.data(), a.size());
}
inline void mul_add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().mul_add(a.data(), b.data(), out.data(), a.size());
}
inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  return active().max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace rilco::kernels
