#pragma once

// Kernel table layout. Kept free of inline code so that ISA-specific
// translation units can include it without emitting vector instructions
// into shared inline symbols.

#include <complex>
#include <cstddef>

namespace hypokin::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  // sum_i a_i b_i w_i
  double (*weighted_dot)(const double* a, const double* b, const double* w, std::size_t n);
  // sum_i a_i^2 w_i
  double (*weighted_norm2)(const double* a, const double* w, std::size_t n);
  // y += alpha x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // z_i *= (c_i + i s_i)
  void (*cmul_unit)(std::complex<double>* z, const double* c, const double* s, std::size_t n);
  // out[r, :] = mat * in[r, :] for r < rows; mat is n x n row-major
  void (*matvec_rows)(const double* mat, std::size_t n, const double* in, double* out,
                      std::size_t rows);
};

const KernelTable& scalar_table();
// nullptr when the variant is not compiled in or not supported by this CPU.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace hypokin::kernels
