#include "hypokin/kernels.hpp"

namespace hypokin::kernels {
namespace {

double dot_scalar(const double* a, const double* b, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i] * w[i];
  return acc;
}

double norm2_scalar(const double* a, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i] * w[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void cmul_unit_scalar(std::complex<double>* z, const double* c, const double* s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real();
    const double im = z[i].imag();
    z[i] = {re * c[i] - im * s[i], im * c[i] + re * s[i]};
  }
}

void matvec_rows_scalar(const double* mat, std::size_t n, const double* in, double* out,
                        std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * n;
    double* y = out + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = mat + i * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
      y[i] = acc;
    }
  }
}

constexpr KernelTable kScalar{Isa::Scalar,   dot_scalar,       norm2_scalar,
                              axpy_scalar,   cmul_unit_scalar, matvec_rows_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace hypokin::kernels
