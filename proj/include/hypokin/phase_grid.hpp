#pragma once

// Discrete phase space T^1_x x [-v_max, v_max]_v.
//
// x is uniform and periodic; derivatives in x are spectral. The Nyquist mode
// of an even n_x carries no well-defined derivative, so every x-derivative
// and the exact transport both annihilate it: the resolved state space is
// the band |k| < n_x/2.
//
// v is truncated; fields are treated as compactly supported (zero beyond
// v_max). Two quadratures: uniform (cell-midpoint nodes, equal weights, so
// weighted projections stay exactly idempotent) and Gauss-Legendre.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hypokin {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Quadrature { Uniform, GaussLegendre };

class XSpectral;

class PhaseGrid {
 public:
  std::size_t n_x() const { return n_x_; }
  std::size_t n_v() const { return n_v_; }
  std::size_t size() const { return n_x_ * n_v_; }
  double length_x() const { return length_x_; }
  double v_max() const { return v_max_; }
  Quadrature quadrature() const { return quadrature_; }

  double dx() const { return length_x_ / static_cast<double>(n_x_); }
  double x(std::size_t i) const { return static_cast<double>(i) * dx(); }
  // Uniform spacing; only meaningful for Quadrature::Uniform.
  double dv() const { return 2.0 * v_max_ / static_cast<double>(n_v_); }

  std::span<const double> v() const { return v_nodes_; }
  std::span<const double> w() const { return v_weights_; }
  // Weights broadcast to every x row times dx, laid out like a field.
  std::span<const double> cell_weights() const { return cell_weights_; }

  // grad_v as a dense n_v x n_v matrix acting on a velocity profile.
  const Eigen::MatrixXd& dv_matrix() const { return dv_matrix_; }
  // Skew-adjoint part of dv_matrix() in the weighted inner product.
  const Eigen::MatrixXd& dv_skew() const { return dv_skew_; }
  const RowMatrix& dv_rows() const { return dv_rows_; }

  // Angular wavenumber of Fourier index m (0 <= m <= n_x/2).
  double wavenumber(std::size_t m) const;
  std::size_t n_modes() const { return n_x_ / 2 + 1; }
  bool is_nyquist(std::size_t m) const { return n_x_ % 2 == 0 && m == n_x_ / 2; }
  // Discrete Poincare constant for x-mean-free functions: 1/k_min^2.
  double poincare_constant() const;

  const XSpectral& spectral() const { return *spectral_; }

  friend std::shared_ptr<const PhaseGrid> build_grid(std::size_t, double, std::size_t, double,
                                                     Quadrature);

 private:
  PhaseGrid() = default;

  std::size_t n_x_ = 0;
  std::size_t n_v_ = 0;
  double length_x_ = 0.0;
  double v_max_ = 0.0;
  Quadrature quadrature_ = Quadrature::Uniform;
  std::vector<double> v_nodes_;
  std::vector<double> v_weights_;
  std::vector<double> cell_weights_;
  Eigen::MatrixXd dv_matrix_;
  Eigen::MatrixXd dv_skew_;
  RowMatrix dv_rows_;
  std::shared_ptr<XSpectral> spectral_;
};

using GridPtr = std::shared_ptr<const PhaseGrid>;

// Rejects n_x < 4, n_v < 8, v_max <= 0, length_x <= 0 with std::invalid_argument.
GridPtr build_grid(std::size_t n_x, double length_x, std::size_t n_v, double v_max,
                   Quadrature mode = Quadrature::Uniform);

// Real-to-complex FFT along x for every velocity column of a field. Spectra
// are laid out mode-major: spectrum[m * n_v + j], m < n_modes.
class XSpectral {
 public:
  XSpectral(std::size_t n_x, std::size_t n_v);
  ~XSpectral();
  XSpectral(const XSpectral&) = delete;
  XSpectral& operator=(const XSpectral&) = delete;

  void forward(std::span<const double> field, std::span<std::complex<double>> spectrum) const;
  // Normalised inverse; overwrites its input.
  void inverse(std::span<std::complex<double>> spectrum, std::span<double> field) const;

  std::size_t n_x() const { return n_x_; }
  std::size_t n_v() const { return n_v_; }
  std::size_t spectrum_size() const { return (n_x_ / 2 + 1) * n_v_; }

 private:
  std::size_t n_x_;
  std::size_t n_v_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

// Real sampled function h(x, v) on a grid, stored x-major: values[i * n_v + j].
class DistributionField {
 public:
  explicit DistributionField(GridPtr grid);  // zero field
  DistributionField(GridPtr grid, std::vector<double> values);

  template <class F>
  static DistributionField from_function(GridPtr grid, F&& f) {
    std::vector<double> vals(grid->size());
    for (std::size_t i = 0; i < grid->n_x(); ++i) {
      for (std::size_t j = 0; j < grid->n_v(); ++j) {
        vals[i * grid->n_v() + j] = f(grid->x(i), grid->v()[j]);
      }
    }
    return DistributionField(std::move(grid), std::move(vals));
  }

  const PhaseGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * grid_->n_v(), grid_->n_v());
  }
  std::span<double> row(std::size_t i) {
    return std::span<double>(values_).subspan(i * grid_->n_v(), grid_->n_v());
  }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * grid_->n_v() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * grid_->n_v() + j]; }

  // Throws std::runtime_error naming the first non-finite entry.
  void check_finite() const;
  bool all_finite() const;

  DistributionField& operator+=(const DistributionField& o);
  DistributionField& operator-=(const DistributionField& o);
  DistributionField& operator*=(double s);
  double max_abs() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

DistributionField operator+(DistributionField a, const DistributionField& b);
DistributionField operator-(DistributionField a, const DistributionField& b);
DistributionField operator*(double s, DistributionField a);

void require_same_grid(const DistributionField& a, const DistributionField& b);

DistributionField grad_x(const DistributionField& h);
DistributionField grad_v(const DistributionField& h);
// Applies a dense n_v x n_v velocity matrix independently at each x node.
DistributionField apply_velocity_matrix(const RowMatrix& mat, const DistributionField& h);

double inner_l2(const DistributionField& h, const DistributionField& g);
// sum_i dx a_i^T A b_i: an x-integrated bilinear form with velocity matrix A.
double velocity_form(const Eigen::MatrixXd& A, const DistributionField& a, const DistributionField& b);
double norm_l2(const DistributionField& h);
double norm_h1(const DistributionField& h);

// Velocity profile sampled at the v nodes; weighted pairing over v only.
double inner_v(std::span<const double> a, std::span<const double> b, const PhaseGrid& grid);

// x-average of a field, broadcast back to every x node.
DistributionField x_mean(const DistributionField& h);

}  // namespace hypokin
