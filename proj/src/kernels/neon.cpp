// AArch64 variant; NEON is part of the base ISA there, so no runtime probe.

#include <arm_neon.h>

#include "hypokin/kernel_table.hpp"

namespace hypokin::kernels {
namespace {

double dot_neon(const double* a, const double* b, const double* w, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), vld1q_f64(w + i));
    acc1 = vfmaq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)),
                     vld1q_f64(w + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i] * w[i];
  return acc;
}

double norm2_neon(const double* a, const double* w, std::size_t n) { return dot_neon(a, a, w, n); }

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void cmul_unit_neon(std::complex<double>* zc, const double* c, const double* s, std::size_t n) {
  double* z = reinterpret_cast<double*>(zc);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t v = vld1q_f64(z + 2 * i);        // (re, im)
    const float64x2_t swapped = vextq_f64(v, v, 1);    // (im, re)
    const float64x2_t sgn = {-s[i], s[i]};
    vst1q_f64(z + 2 * i, vfmaq_f64(vmulq_n_f64(v, c[i]), swapped, sgn));
  }
}

void matvec_rows_neon(const double* mat, std::size_t n, const double* in, double* out,
                      std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * n;
    double* y = out + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = mat + i * n;
      float64x2_t acc = vdupq_n_f64(0.0);
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2) acc = vfmaq_f64(acc, vld1q_f64(row + j), vld1q_f64(x + j));
      double tail = vaddvq_f64(acc);
      for (; j < n; ++j) tail += row[j] * x[j];
      y[i] = tail;
    }
  }
}

constexpr KernelTable kNeon{Isa::Neon, dot_neon,       norm2_neon,
                            axpy_neon, cmul_unit_neon, matvec_rows_neon};

}  // namespace

const KernelTable* neon_table_unchecked() { return &kNeon; }

}  // namespace hypokin::kernels
