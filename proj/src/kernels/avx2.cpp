// Compiled with -mavx2 -mfma; reachable only through avx2_table() after a
// runtime CPU check in dispatch.cpp.

#include <immintrin.h>

#include "hypokin/kernel_table.hpp"

namespace hypokin::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, const double* w, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(w + i), acc0);
    acc1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(w + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(p, _mm256_loadu_pd(w + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i] * w[i];
  return acc;
}

double norm2_avx2(const double* a, const double* w, std::size_t n) {
  return dot_avx2(a, a, w, n);
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Two complex values per register: (re0, im0, re1, im1).
void cmul_unit_avx2(std::complex<double>* zc, const double* c, const double* s, std::size_t n) {
  double* z = reinterpret_cast<double*>(zc);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(z + 2 * i);
    const __m256d cc =
        _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(c + i)), 0b01010000);
    const __m256d ss =
        _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(s + i)), 0b01010000);
    const __m256d swapped = _mm256_permute_pd(v, 0b0101);
    // (re c - im s, im c + re s)
    _mm256_storeu_pd(z + 2 * i, _mm256_addsub_pd(_mm256_mul_pd(v, cc), _mm256_mul_pd(swapped, ss)));
  }
  for (; i < n; ++i) {
    const double re = z[2 * i];
    const double im = z[2 * i + 1];
    z[2 * i] = re * c[i] - im * s[i];
    z[2 * i + 1] = im * c[i] + re * s[i];
  }
}

void matvec_rows_avx2(const double* mat, std::size_t n, const double* in, double* out,
                      std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * n;
    double* y = out + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = mat + i * n;
      __m256d acc = _mm256_setzero_pd();
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc);
      }
      double tail = hsum(acc);
      for (; j < n; ++j) tail += row[j] * x[j];
      y[i] = tail;
    }
  }
}

constexpr KernelTable kAvx2{Isa::Avx2, dot_avx2,       norm2_avx2,
                            axpy_avx2, cmul_unit_avx2, matvec_rows_avx2};

}  // namespace

const KernelTable* avx2_table_unchecked() { return &kAvx2; }

}  // namespace hypokin::kernels
