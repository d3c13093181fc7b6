#include "hypokin/models.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hypokin/kernels.hpp"

namespace hypokin {
namespace {

Eigen::Map<const Eigen::VectorXd> as_vec(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double discrete_mass(const std::vector<double>& maxw, std::span<const double> w, double k, int eps) {
  double s = 0.0;
  for (std::size_t j = 0; j < maxw.size(); ++j) s += w[j] * k * maxw[j] / (1.0 + eps * k * maxw[j]);
  return s;
}

// Staggered stencil coefficients for the half point between nodes k and k+1.
// Returns (first node index, coefficients) with coefficients already / dv.
std::pair<std::size_t, std::vector<double>> stagger_row(std::size_t k, std::size_t n, double dv) {
  if (k == 0 || k + 2 >= n) return {k, {-1.0 / dv, 1.0 / dv}};
  const double s = 1.0 / (24.0 * dv);
  return {k - 1, {s, -27.0 * s, 27.0 * s, -s}};
}

// Dirichlet-form factor B = diag(M_half) S diag(1/M) for the uniform grid,
// assembled from exponent differences so that no Maxwellian ratio overflows.
Eigen::MatrixXd fp_uniform_factor(const PhaseGrid& g) {
  const std::size_t n = g.n_v();
  const double dv = g.dv();
  const auto v = g.v();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n - 1),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double vh = 0.5 * (v[k] + v[k + 1]);
    auto [first, c] = stagger_row(k, n, dv);
    for (std::size_t q = 0; q < c.size(); ++q) {
      const std::size_t j = first + q;
      B(k, j) = c[q] * std::exp(0.25 * (v[j] * v[j] - vh * vh));
    }
  }
  return B;
}

Eigen::VectorXd unit_weighted(Eigen::VectorXd phi, const Eigen::VectorXd& w) {
  const double nrm = std::sqrt(phi.cwiseProduct(phi).dot(w));
  return phi / nrm;
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Relaxation: return "relaxation";
    case ModelKind::SemiClassical: return "semiclassical";
    case ModelKind::FokkerPlanck: return "fokker_planck";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "relaxation" || s == "bgk") return ModelKind::Relaxation;
  if (s == "semiclassical" || s == "semi_classical") return ModelKind::SemiClassical;
  if (s == "fokker_planck" || s == "fokkerplanck") return ModelKind::FokkerPlanck;
  throw std::invalid_argument("model.kind: unknown model '" + s + "'");
}

PotentialSpec PotentialSpec::cosine(const PhaseGrid& grid, double amplitude, int mode) {
  const double k = grid.wavenumber(1) * mode;
  std::vector<double> vals(grid.n_x());
  for (std::size_t i = 0; i < grid.n_x(); ++i) vals[i] = amplitude * std::cos(k * grid.x(i));
  PotentialSpec p;
  p.values = std::move(vals);
  // Exact derivatives of a single mode; the grid maximum is what is reported.
  double vmax = 0.0, d1 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i < grid.n_x(); ++i) {
    const double x = grid.x(i);
    vmax = std::max(vmax, std::abs(amplitude * std::cos(k * x)));
    d1 = std::max(d1, std::abs(amplitude * k * std::sin(k * x)));
    d2 = std::max(d2, std::abs(amplitude * k * k * std::cos(k * x)));
  }
  p.c2_bound = std::max({vmax, d1, d2});
  return p;
}

PotentialSpec PotentialSpec::from_values(const PhaseGrid& grid, std::vector<double> values) {
  if (values.size() != grid.n_x()) throw std::invalid_argument("potential size != n_x");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  for (double& v : values) v -= mean;
  // Spectral derivatives of V through a one-column field.
  auto g1 = build_grid(grid.n_x(), grid.length_x(), 8, 1.0);
  DistributionField f(g1);
  for (std::size_t i = 0; i < grid.n_x(); ++i)
    for (std::size_t j = 0; j < 8; ++j) f(i, j) = values[i];
  const DistributionField d1 = grad_x(f);
  const DistributionField d2 = grad_x(d1);
  PotentialSpec p;
  p.c2_bound = std::max({f.max_abs(), d1.max_abs(), d2.max_abs()});
  p.values = std::move(values);
  return p;
}

void ModelSpec::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("model.kappa must be > 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("model.rho must be > 0");
  if (epsilon < -1 || epsilon > 1) throw std::invalid_argument("model.epsilon must be -1, 0 or 1");
  if (poisson && kind == ModelKind::SemiClassical) {
    throw std::invalid_argument("model.poisson is not available for the semi-classical model");
  }
  if (potential && kind != ModelKind::Relaxation) {
    throw std::invalid_argument("model.potential requires the relaxation model");
  }
  if (potential && poisson) {
    throw std::invalid_argument("model.potential and model.poisson are mutually exclusive");
  }
}

std::vector<double> maxwellian(const PhaseGrid& grid) {
  std::vector<double> m(grid.n_v());
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < m.size(); ++j) m[j] = c * std::exp(-0.5 * grid.v()[j] * grid.v()[j]);
  return m;
}

std::vector<double> discrete_maxwellian(const PhaseGrid& grid) {
  std::vector<double> m = maxwellian(grid);
  double s = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) s += grid.w()[j] * m[j];
  for (double& x : m) x /= s;
  return m;
}

EquilibriumSpec solve_kappa_inf(double rho, int epsilon, const PhaseGrid& grid) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
  if (epsilon < -1 || epsilon > 1) throw std::invalid_argument("epsilon must be -1, 0 or 1");
  EquilibriumSpec eq;
  eq.kind = ModelKind::SemiClassical;
  eq.rho_inf = rho;
  const std::vector<double> maxw = discrete_maxwellian(grid);
  if (epsilon == 0) {
    eq.kappa_inf = rho;  // the discrete Maxwellian has unit mass
    return eq;
  }
  auto resid = [&](double k) { return discrete_mass(maxw, grid.w(), k, epsilon) - rho; };
  double lo = 0.0;
  double hi;
  if (epsilon < 0) {
    const double mmax = *std::max_element(maxw.begin(), maxw.end());
    hi = (1.0 - 1e-8) / mmax;
    if (resid(hi) < 0.0) {
      throw std::runtime_error("boson equilibrium: mass exceeds the regular range on this grid");
    }
  } else {
    hi = std::max(1.0, rho);
    int guard = 0;
    while (resid(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 1000) throw std::runtime_error("fermion equilibrium: root bracket diverged");
    }
  }
  boost::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(a)); };
  const auto r = boost::math::tools::toms748_solve(resid, lo, hi, resid(lo), resid(hi), tol, iters);
  if (iters >= 200) throw std::runtime_error("kappa_inf root solve did not converge");
  // Pick the endpoint with the smaller residual.
  eq.kappa_inf = std::abs(resid(r.first)) < std::abs(resid(r.second)) ? r.first : r.second;
  if (epsilon < 0) {
    const double mmax = *std::max_element(maxw.begin(), maxw.end());
    if (!(1.0 - eq.kappa_inf * mmax > 0.0)) {
      throw std::runtime_error("boson equilibrium at the regularity bound");
    }
  }
  return eq;
}

std::vector<double> collision_frequency_boltzmann(double gamma_exp, std::span<const double> v_nodes,
                                                  double c_phi) {
  if (!(gamma_exp >= 0.0 && gamma_exp <= 1.0)) {
    throw std::invalid_argument("gamma_exp must lie in [0, 1]");
  }
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  boost::math::quadrature::exp_sinh<double> integrator;
  std::vector<double> nu(v_nodes.size());
  for (std::size_t j = 0; j < v_nodes.size(); ++j) {
    const double v = v_nodes[j];
    if (gamma_exp == 0.0) {
      nu[j] = c_phi;
      continue;
    }
    auto f = [&](double u) {
      const double g = std::pow(u, gamma_exp);
      return g * c * (std::exp(-0.5 * (v + u) * (v + u)) + std::exp(-0.5 * (v - u) * (v - u)));
    };
    nu[j] = c_phi * integrator.integrate(f, 1e-13);
  }
  return nu;
}

Eigen::MatrixXd staggered_difference(const PhaseGrid& g) {
  const std::size_t n = g.n_v();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n - 1),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    auto [first, c] = stagger_row(k, n, g.dv());
    for (std::size_t q = 0; q < c.size(); ++q) S(k, first + q) = c[q];
  }
  return S;
}

Model::Model(ModelSpec spec, GridPtr grid)
    : spec_(std::move(spec)), grid_(std::move(grid)), global_kernel_(grid_) {
  spec_.validate();
  const PhaseGrid& g = *grid_;
  const auto n = static_cast<Eigen::Index>(g.n_v());
  const Eigen::VectorXd w = as_vec(g.w());
  const Eigen::VectorXd v = as_vec(g.v());

  maxwell_ = discrete_maxwellian(g);
  sqrt_maxwell_.resize(maxwell_.size());
  for (std::size_t j = 0; j < maxwell_.size(); ++j) sqrt_maxwell_[j] = std::sqrt(maxwell_[j]);
  const Eigen::VectorXd Md = as_vec(maxwell_);
  const Eigen::VectorXd M = as_vec(sqrt_maxwell_);

  equilibrium_.kind = spec_.kind;
  equilibrium_.kappa_inf = 1.0;
  equilibrium_.rho_inf = 1.0;

  Eigen::VectorXd phi;
  switch (spec_.kind) {
    case ModelKind::Relaxation: {
      const double ik = 1.0 / spec_.kappa;
      K_ = ik * M * M.cwiseProduct(w).transpose();
      Lambda_ = ik * Eigen::MatrixXd::Identity(n, n);
      nu_.assign(g.n_v(), ik);
      lambda_gram_ = w.asDiagonal();
      f_inf_ = maxwell_;
      scaling_ = sqrt_maxwell_;
      phi = M;
      break;
    }
    case ModelKind::SemiClassical: {
      equilibrium_ = solve_kappa_inf(spec_.rho, spec_.epsilon, g);
      const double kinf = equilibrium_.kappa_inf;
      const double eps = spec_.epsilon;
      const Eigen::VectorXd den = (Eigen::VectorXd::Ones(n) + eps * kinf * Md);
      const Eigen::VectorXd finf = kinf * Md.cwiseQuotient(den);
      const double rho_d = finf.dot(w);
      const Eigen::VectorXd nu = (rho_d / (spec_.kappa * kinf)) * den;
      K_ = (1.0 / spec_.kappa) * M * M.cwiseProduct(w).transpose();
      Lambda_ = nu.asDiagonal();
      nu_ = to_std(nu);
      lambda_gram_ = w.asDiagonal();
      f_inf_ = to_std(finf);
      scaling_ = to_std(std::sqrt(kinf) * M.cwiseQuotient(den));
      phi = M.cwiseQuotient(den);
      break;
    }
    case ModelKind::FokkerPlanck: {
      Eigen::MatrixXd form;  // W (-L), symmetric positive semidefinite
      if (g.quadrature() == Quadrature::Uniform) {
        const Eigen::MatrixXd B = fp_uniform_factor(g);
        form = g.dv() * B.transpose() * B;
        const Eigen::MatrixXd S = staggered_difference(g);
        lambda_gram_ = Eigen::MatrixXd(w.cwiseProduct(v).cwiseProduct(v).asDiagonal()) +
                       g.dv() * S.transpose() * S;
      } else {
        const Eigen::MatrixXd& D = g.dv_matrix();
        const Eigen::MatrixXd A = D + Eigen::MatrixXd((0.5 * v).asDiagonal());
        form = A.transpose() * w.asDiagonal() * A;
        lambda_gram_ = Eigen::MatrixXd(w.cwiseProduct(v).cwiseProduct(v).asDiagonal()) +
                       D.transpose() * w.asDiagonal() * D;
      }
      form = 0.5 * (form + form.transpose());
      Lambda_ = w.cwiseInverse().asDiagonal() * form;
      K_ = Eigen::MatrixXd::Zero(n, n);
      f_inf_ = maxwell_;
      scaling_ = sqrt_maxwell_;
      if (g.quadrature() == Quadrature::Uniform) {
        phi = M;
      } else {
        // Numerical null vector of the symmetrised form.
        const Eigen::VectorXd sw = w.cwiseSqrt();
        const Eigen::MatrixXd sym = sw.cwiseInverse().asDiagonal() * form * sw.cwiseInverse().asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
        phi = sw.cwiseInverse().cwiseProduct(es.eigenvectors().col(0));
        if (phi.dot(M.cwiseProduct(w)) < 0.0) phi = -phi;
      }
      break;
    }
  }
  L_ = K_ - Lambda_;
  L_rows_ = L_;
  kernel_ = to_std(unit_weighted(phi, w));

  // Global kernel: e^{-V/2} phi with a potential, phi otherwise; unit L2 norm.
  std::vector<double> profile(g.n_x(), 1.0);
  if (spec_.potential) {
    for (std::size_t i = 0; i < g.n_x(); ++i) profile[i] = std::exp(-0.5 * spec_.potential->values[i]);
  }
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    for (std::size_t j = 0; j < g.n_v(); ++j) global_kernel_(i, j) = profile[i] * kernel_[j];
  }
  global_kernel_ *= 1.0 / norm_l2(global_kernel_);
}

std::vector<double> potential_gradient(const Model& model) {
  if (!model.spec().potential) return {};
  const PhaseGrid& g = model.grid();
  DistributionField vfield(model.grid_ptr());
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    for (std::size_t j = 0; j < g.n_v(); ++j) vfield(i, j) = model.spec().potential->values[i];
  }
  const DistributionField dv = grad_x(vfield);
  std::vector<double> out(g.n_x());
  for (std::size_t i = 0; i < g.n_x(); ++i) out[i] = dv(i, 0);
  return out;
}

DistributionField apply_L(const Model& model, const DistributionField& h) {
  return apply_velocity_matrix(model.L_rows(), h);
}

std::pair<DistributionField, DistributionField> split_K_Lambda(const Model& model,
                                                               const DistributionField& h) {
  const RowMatrix K = model.K();
  const RowMatrix Lam = model.Lambda();
  return {apply_velocity_matrix(K, h), apply_velocity_matrix(Lam, h)};
}

DistributionField project_local(const Model& model, const DistributionField& h) {
  const PhaseGrid& g = h.grid();
  const auto phi = model.kernel();
  DistributionField out(h.grid_ptr());
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    const double c = kernels::weighted_dot(h.row(i), phi, g.w());
    auto r = out.row(i);
    for (std::size_t j = 0; j < g.n_v(); ++j) r[j] = c * phi[j];
  }
  return out;
}

double kernel_moment(const Model& model, const DistributionField& h) {
  return inner_l2(h, model.global_kernel());
}

DistributionField project_global(const Model& model, const DistributionField& h) {
  DistributionField out = model.global_kernel();
  out *= kernel_moment(model, h);
  return out;
}

DistributionField gamma_bilinear(const Model& model, const DistributionField& h1,
                                 const DistributionField& h2) {
  require_same_grid(h1, h2);
  DistributionField out(h1.grid_ptr());
  if (model.kind() != ModelKind::SemiClassical || model.spec().epsilon == 0) return out;
  const PhaseGrid& g = h1.grid();
  const double eps = model.spec().epsilon;
  const double kinf = model.equilibrium().kappa_inf;
  const double pref = eps * std::sqrt(kinf) / model.spec().kappa;
  const auto Md = model.maxwell();
  const auto M = model.sqrt_maxwell();
  const std::size_t nv = g.n_v();
  // S(h)_i = sum_j w_j h_j M_j (Md_j - Md_i) / (1 + eps kinf Md_j) = a(h) - Md_i b(h)
  std::vector<double> ca(nv), cb(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    cb[j] = M[j] / (1.0 + eps * kinf * Md[j]);
    ca[j] = cb[j] * Md[j];
  }
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    const auto r1 = h1.row(i);
    const auto r2 = h2.row(i);
    const double a1 = kernels::weighted_dot(r1, ca, g.w());
    const double b1 = kernels::weighted_dot(r1, cb, g.w());
    const double a2 = kernels::weighted_dot(r2, ca, g.w());
    const double b2 = kernels::weighted_dot(r2, cb, g.w());
    auto o = out.row(i);
    for (std::size_t j = 0; j < nv; ++j) {
      const double s1 = a1 - Md[j] * b1;
      const double s2 = a2 - Md[j] * b2;
      o[j] = 0.5 * pref * (r1[j] * s2 + r2[j] * s1);
    }
  }
  return out;
}

DistributionField apply_Q_nonlinear(const Model& model, const DistributionField& f) {
  const PhaseGrid& g = f.grid();
  const std::size_t nv = g.n_v();
  const auto Md = model.maxwell();
  DistributionField out(f.grid_ptr());
  if (model.kind() == ModelKind::FokkerPlanck) {
    if (g.quadrature() != Quadrature::Uniform) {
      throw std::invalid_argument("nonlinear Fokker-Planck operator needs the uniform grid");
    }
    // Flux form d_v( Md d_v (f / Md) ) on the half points; exactly mass free.
    const Eigen::MatrixXd S = staggered_difference(g);
    const auto v = g.v();
    std::vector<double> mh(nv - 1);
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const auto Ma = maxwellian(g);
    const double scale = Md[0] / Ma[0];
    for (std::size_t k = 0; k + 1 < nv; ++k) {
      const double vh = 0.5 * (v[k] + v[k + 1]);
      mh[k] = scale * c * std::exp(-0.5 * vh * vh);
    }
    Eigen::VectorXd q(static_cast<Eigen::Index>(nv));
    for (std::size_t i = 0; i < g.n_x(); ++i) {
      const auto r = f.row(i);
      for (std::size_t j = 0; j < nv; ++j) q[static_cast<Eigen::Index>(j)] = r[j] / Md[j];
      Eigen::VectorXd flux = S * q;
      for (std::size_t k = 0; k + 1 < nv; ++k) flux[static_cast<Eigen::Index>(k)] *= mh[k];
      const Eigen::VectorXd div = -(S.transpose() * flux);
      auto o = out.row(i);
      for (std::size_t j = 0; j < nv; ++j) o[j] = div[static_cast<Eigen::Index>(j)];
    }
    return out;
  }
  const double eps = model.kind() == ModelKind::SemiClassical ? model.spec().epsilon : 0.0;
  const double ik = 1.0 / model.spec().kappa;
  double s0 = 0.0;
  for (std::size_t j = 0; j < nv; ++j) s0 += g.w()[j] * Md[j];
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    const auto r = f.row(i);
    double rho = 0.0, m1 = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
      rho += g.w()[j] * r[j];
      m1 += g.w()[j] * Md[j] * r[j];
    }
    auto o = out.row(i);
    for (std::size_t j = 0; j < nv; ++j) {
      o[j] = ik * (Md[j] * (1.0 - eps * r[j]) * rho - r[j] * (s0 - eps * m1));
    }
  }
  return out;
}

}  // namespace hypokin
