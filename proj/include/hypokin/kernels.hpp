#pragma once

// Data-parallel inner loops shared by the grid, model and solver layers.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 (x86-64) or NEON (AArch64) variant. The variant is
// chosen once at runtime from CPU features; HYPOKIN_SIMD=scalar|avx2|neon
// forces a choice. Vector variants reassociate reductions, so they agree
// with the scalar path to round-off, not bitwise.

#include <span>
#include <string_view>

#include "hypokin/kernel_table.hpp"

namespace hypokin::kernels {

const KernelTable& active();
std::string_view isa_name(Isa isa);

inline double weighted_dot(std::span<const double> a, std::span<const double> b,
                           std::span<const double> w) {
  return active().weighted_dot(a.data(), b.data(), w.data(), a.size());
}

inline double weighted_norm2(std::span<const double> a, std::span<const double> w) {
  return active().weighted_norm2(a.data(), w.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void cmul_unit(std::span<std::complex<double>> z, std::span<const double> c,
                      std::span<const double> s) {
  active().cmul_unit(z.data(), c.data(), s.data(), z.size());
}

inline void matvec_rows(std::span<const double> mat, std::size_t n, std::span<const double> in,
                        std::span<double> out) {
  active().matvec_rows(mat.data(), n, in.data(), out.data(), in.size() / n);
}

}  // namespace hypokin::kernels
