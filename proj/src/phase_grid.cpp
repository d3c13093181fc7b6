#include "hypokin/phase_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hypokin/kernels.hpp"

namespace hypokin {
namespace {

// FFTW's planner is not re-entrant; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Golub-Welsch on the Legendre Jacobi matrix; nodes ascending on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& t, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double b = kk / std::sqrt(4.0 * kk * kk - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) throw std::runtime_error("Gauss-Legendre eigensolve failed");
  t.resize(n);
  w.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    t[j] = es.eigenvalues()(j);
    const double q = es.eigenvectors()(0, j);
    w[j] = 2.0 * q * q;
  }
  // Symmetrise: the rule is exactly even.
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double tn = 0.5 * (t[n - 1 - j] - t[j]);
    const double wn = 0.5 * (w[j] + w[n - 1 - j]);
    t[j] = -tn;
    t[n - 1 - j] = tn;
    w[j] = w[n - 1 - j] = wn;
  }
  if (n % 2 == 1) t[n / 2] = 0.0;
}

// Fourth-order differences: centered inside, one-sided in the two edge rows.
Eigen::MatrixXd uniform_dv(std::size_t n, double dv) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  const double s = 1.0 / (12.0 * dv);
  const double edge0[5] = {-25, 48, -36, 16, -3};
  const double edge1[5] = {-3, -10, 18, -6, 1};
  for (int k = 0; k < 5; ++k) {
    D(0, k) = edge0[k] * s;
    D(1, k) = edge1[k] * s;
    D(n - 1, n - 1 - k) = -edge0[k] * s;
    D(n - 2, n - 1 - k) = -edge1[k] * s;
  }
  for (std::size_t i = 2; i + 2 < n; ++i) {
    D(i, i - 2) = s;
    D(i, i - 1) = -8.0 * s;
    D(i, i + 1) = 8.0 * s;
    D(i, i + 2) = -s;
  }
  return D;
}

// Barycentric differentiation matrix on Legendre nodes t (ascending) with
// rule weights wt; lambda_j = (-1)^j sqrt((1 - t_j^2) w_j).
Eigen::MatrixXd legendre_dv(const std::vector<double>& t, const std::vector<double>& wt,
                            double scale) {
  const std::size_t n = t.size();
  std::vector<double> lam(n);
  for (std::size_t j = 0; j < n; ++j) {
    lam[j] = ((j % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - t[j] * t[j]) * wt[j]);
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (lam[j] / lam[i]) / (t[i] - t[j]);
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D / scale;
}

}  // namespace

double PhaseGrid::wavenumber(std::size_t m) const {
  return 2.0 * std::numbers::pi * static_cast<double>(m) / length_x_;
}

double PhaseGrid::poincare_constant() const {
  const double k1 = wavenumber(1);
  return 1.0 / (k1 * k1);
}

GridPtr build_grid(std::size_t n_x, double length_x, std::size_t n_v, double v_max,
                   Quadrature mode) {
  if (n_x < 4) throw std::invalid_argument("n_x must be >= 4");
  if (n_v < 8) throw std::invalid_argument("n_v must be >= 8");
  if (!(v_max > 0.0) || !std::isfinite(v_max)) throw std::invalid_argument("v_max must be > 0");
  if (!(length_x > 0.0) || !std::isfinite(length_x)) {
    throw std::invalid_argument("length_x must be > 0");
  }

  std::shared_ptr<PhaseGrid> g(new PhaseGrid());
  g->n_x_ = n_x;
  g->n_v_ = n_v;
  g->length_x_ = length_x;
  g->v_max_ = v_max;
  g->quadrature_ = mode;

  if (mode == Quadrature::Uniform) {
    const double dv = 2.0 * v_max / static_cast<double>(n_v);
    g->v_nodes_.resize(n_v);
    g->v_weights_.assign(n_v, dv);
    for (std::size_t j = 0; j < n_v; ++j) {
      g->v_nodes_[j] = -v_max + (static_cast<double>(j) + 0.5) * dv;
    }
    g->dv_matrix_ = uniform_dv(n_v, dv);
  } else {
    std::vector<double> t, wt;
    gauss_legendre(n_v, t, wt);
    g->v_nodes_.resize(n_v);
    g->v_weights_.resize(n_v);
    for (std::size_t j = 0; j < n_v; ++j) {
      g->v_nodes_[j] = v_max * t[j];
      g->v_weights_[j] = v_max * wt[j];
    }
    g->dv_matrix_ = legendre_dv(t, wt, v_max);
  }

  Eigen::Map<const Eigen::VectorXd> w(g->v_weights_.data(), static_cast<Eigen::Index>(n_v));
  const Eigen::MatrixXd& D = g->dv_matrix_;
  g->dv_skew_ = 0.5 * (D - w.cwiseInverse().asDiagonal() * D.transpose() * w.asDiagonal());
  g->dv_rows_ = D;

  g->cell_weights_.resize(n_x * n_v);
  const double dx = length_x / static_cast<double>(n_x);
  for (std::size_t i = 0; i < n_x; ++i) {
    for (std::size_t j = 0; j < n_v; ++j) g->cell_weights_[i * n_v + j] = dx * g->v_weights_[j];
  }
  g->spectral_ = std::make_shared<XSpectral>(n_x, n_v);
  return g;
}

XSpectral::XSpectral(std::size_t n_x, std::size_t n_v) : n_x_(n_x), n_v_(n_v) {
  std::vector<double> re(n_x * n_v);
  std::vector<std::complex<double>> sp((n_x / 2 + 1) * n_v);
  const int n = static_cast<int>(n_x);
  const int howmany = static_cast<int>(n_v);
  const int stride = static_cast<int>(n_v);
  auto* c = reinterpret_cast<fftw_complex*>(sp.data());
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_many_dft_r2c(1, &n, howmany, re.data(), nullptr, stride, 1, c,
                                         nullptr, stride, 1, FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_plan_ = fftw_plan_many_dft_c2r(1, &n, howmany, c, nullptr, stride, 1, re.data(),
                                         nullptr, stride, 1, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("FFTW planning failed");
}

XSpectral::~XSpectral() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void XSpectral::forward(std::span<const double> field,
                        std::span<std::complex<double>> spectrum) const {
  std::vector<double> tmp(field.begin(), field.end());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), tmp.data(),
                       reinterpret_cast<fftw_complex*>(spectrum.data()));
}

void XSpectral::inverse(std::span<std::complex<double>> spectrum, std::span<double> field) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(spectrum.data()), field.data());
  const double s = 1.0 / static_cast<double>(n_x_);
  for (double& f : field) f *= s;
}

DistributionField::DistributionField(GridPtr grid)
    : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

DistributionField::DistributionField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) {
    throw std::invalid_argument("field size does not match its grid");
  }
  check_finite();
}

bool DistributionField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void DistributionField::check_finite() const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      std::ostringstream os;
      os << "non-finite field entry at (x=" << k / grid_->n_v() << ", v=" << k % grid_->n_v()
         << ")";
      throw std::runtime_error(os.str());
    }
  }
}

void require_same_grid(const DistributionField& a, const DistributionField& b) {
  if (a.grid_ptr() != b.grid_ptr()) {
    const PhaseGrid& g = a.grid();
    const PhaseGrid& h = b.grid();
    if (g.n_x() != h.n_x() || g.n_v() != h.n_v() || g.length_x() != h.length_x() ||
        g.v_max() != h.v_max() || g.quadrature() != h.quadrature()) {
      throw std::invalid_argument("fields live on different grids");
    }
  }
}

DistributionField& DistributionField::operator+=(const DistributionField& o) {
  require_same_grid(*this, o);
  kernels::axpy(1.0, o.values(), values_);
  return *this;
}

DistributionField& DistributionField::operator-=(const DistributionField& o) {
  require_same_grid(*this, o);
  kernels::axpy(-1.0, o.values(), values_);
  return *this;
}

DistributionField& DistributionField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double DistributionField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

DistributionField operator+(DistributionField a, const DistributionField& b) { return a += b; }
DistributionField operator-(DistributionField a, const DistributionField& b) { return a -= b; }
DistributionField operator*(double s, DistributionField a) { return a *= s; }

DistributionField grad_x(const DistributionField& h) {
  const PhaseGrid& g = h.grid();
  const XSpectral& fft = g.spectral();
  std::vector<std::complex<double>> sp(fft.spectrum_size());
  fft.forward(h.values(), sp);
  const std::size_t nv = g.n_v();
  for (std::size_t m = 0; m < g.n_modes(); ++m) {
    const std::complex<double> ik =
        g.is_nyquist(m) ? std::complex<double>{} : std::complex<double>(0.0, g.wavenumber(m));
    for (std::size_t j = 0; j < nv; ++j) sp[m * nv + j] *= ik;
  }
  DistributionField out(h.grid_ptr());
  fft.inverse(sp, out.values());
  return out;
}

DistributionField apply_velocity_matrix(const RowMatrix& mat, const DistributionField& h) {
  const std::size_t nv = h.grid().n_v();
  if (static_cast<std::size_t>(mat.rows()) != nv || static_cast<std::size_t>(mat.cols()) != nv) {
    throw std::invalid_argument("velocity matrix size does not match grid");
  }
  DistributionField out(h.grid_ptr());
  kernels::matvec_rows(std::span<const double>(mat.data(), nv * nv), nv, h.values(), out.values());
  return out;
}

DistributionField grad_v(const DistributionField& h) {
  return apply_velocity_matrix(h.grid().dv_rows(), h);
}

double inner_l2(const DistributionField& h, const DistributionField& g) {
  require_same_grid(h, g);
  return kernels::weighted_dot(h.values(), g.values(), h.grid().cell_weights());
}

double velocity_form(const Eigen::MatrixXd& A, const DistributionField& a,
                     const DistributionField& b) {
  require_same_grid(a, b);
  const PhaseGrid& g = a.grid();
  const auto n = static_cast<Eigen::Index>(g.n_v());
  double s = 0.0;
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    Eigen::Map<const Eigen::VectorXd> ai(a.row(i).data(), n);
    Eigen::Map<const Eigen::VectorXd> bi(b.row(i).data(), n);
    s += ai.dot(A * bi);
  }
  return s * g.dx();
}

double norm_l2(const DistributionField& h) {
  return std::sqrt(kernels::weighted_norm2(h.values(), h.grid().cell_weights()));
}

double norm_h1(const DistributionField& h) {
  const auto& w = h.grid().cell_weights();
  const double a = kernels::weighted_norm2(h.values(), w);
  const double b = kernels::weighted_norm2(grad_x(h).values(), w);
  const double c = kernels::weighted_norm2(grad_v(h).values(), w);
  return std::sqrt(a + b + c);
}

double inner_v(std::span<const double> a, std::span<const double> b, const PhaseGrid& grid) {
  return kernels::weighted_dot(a, b, grid.w());
}

DistributionField x_mean(const DistributionField& h) {
  const PhaseGrid& g = h.grid();
  const std::size_t nv = g.n_v();
  std::vector<double> mean(nv, 0.0);
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    kernels::axpy(1.0, h.row(i), mean);
  }
  for (double& m : mean) m /= static_cast<double>(g.n_x());
  DistributionField out(h.grid_ptr());
  for (std::size_t i = 0; i < g.n_x(); ++i) std::copy(mean.begin(), mean.end(), out.row(i).begin());
  return out;
}

}  // namespace hypokin
