#include "hypokin/constants.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hypokin/sampling.hpp"

namespace hypokin {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

VectorXd wvec(const PhaseGrid& g) {
  return Eigen::Map<const VectorXd>(g.w().data(), static_cast<Eigen::Index>(g.n_v()));
}

// Eigenvalues of A x = mu B x, B symmetric positive definite, ascending.
VectorXd gen_eigs(const MatrixXd& A, const MatrixXd& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(sym(A), sym(B), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolve failed");
  return es.eigenvalues();
}

// Columns span the weighted-orthogonal complement of phi (weighted unit).
MatrixXd complement_basis(std::span<const double> phi, const VectorXd& w) {
  const auto n = w.size();
  const VectorXd sw = w.cwiseSqrt();
  VectorXd u(n);
  for (Eigen::Index j = 0; j < n; ++j) u[j] = sw[j] * phi[static_cast<std::size_t>(j)];
  u.normalize();
  Eigen::HouseholderQR<MatrixXd> qr(u);
  const MatrixXd Q = qr.householderQ();
  return sw.cwiseInverse().asDiagonal() * Q.rightCols(n - 1);
}

DistributionField apply(const MatrixXd& A, const DistributionField& h) {
  return apply_velocity_matrix(RowMatrix(A), h);
}

// Relative slack of "lhs <= rhs".
double margin(double lhs, double rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return (rhs - lhs) / scale;
}

void record(std::map<std::string, double>& worst, const std::string& key, double m) {
  auto it = worst.find(key);
  if (it == worst.end() || m < it->second) worst[key] = m;
}

double c_of_delta(const MatrixXd& DtWD, const MatrixXd& K, const MatrixXd& W, double delta) {
  const double top = gen_eigs(sym(DtWD * K) - delta * DtWD, W).maxCoeff();
  return std::max(0.0, top);
}

}  // namespace

double CoercivityConstants::c_delta_at(double delta) const {
  for (const auto& e : c_delta) {
    if (std::abs(e.delta - delta) <= 1e-12 * std::max(1.0, std::abs(delta))) return e.value;
  }
  throw std::out_of_range("C(delta) not tabulated at the requested delta");
}

void CoercivityConstants::validate() const {
  const double vals[] = {nu0, nu1, nu2, nu3, nu4, nu5, nu6, c_l, lambda_local, c_p};
  for (double v : vals) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("coercivity constants must be finite and strictly positive");
    }
  }
  for (const auto& e : c_delta) {
    if (!(e.value >= 0.0)) throw std::invalid_argument("C(delta) must be non-negative");
  }
}

GradientConstants gradient_constants(const CoercivityConstants& c) {
  GradientConstants g;
  g.delta_star = c.delta_star();
  g.c_delta_star = c.c_delta_at(g.delta_star);
  g.d = 2.0 * g.c_delta_star + 2.0 * c.nu4;
  const double r = c.nu1 / c.nu0;
  g.c1 = 2.0 * g.d * r;
  g.c2 = 2.0 * g.d * c.c_p + 2.0 * r / c.nu3;
  return g;
}

CoercivityConstants measure_constants(const Model& model, const MeasureOptions& opts) {
  if (opts.n_samples < 100) throw std::invalid_argument("measure_constants needs n_samples >= 100");
  const PhaseGrid& g = model.grid();
  const VectorXd w = wvec(g);
  const MatrixXd W = w.asDiagonal();
  const MatrixXd& D = g.dv_matrix();
  const MatrixXd& G = model.lambda_gram();
  const MatrixXd& Lam = model.Lambda();
  const MatrixXd& L = model.L();
  const MatrixXd& K = model.K();
  const MatrixXd DtWD = D.transpose() * W * D;
  const MatrixXd E_lam = sym(W * Lam);
  const MatrixXd E_L = -sym(W * L);
  const MatrixXd Q = complement_basis(model.kernel(), w);
  const bool lam_degenerate = model.kind() == ModelKind::FokkerPlanck;

  CoercivityConstants c;
  c.c_p = g.poincare_constant();

  if (lam_degenerate) {
    c.nu1 = gen_eigs(Q.transpose() * E_lam * Q, Q.transpose() * G * Q).minCoeff();
  } else {
    c.nu1 = gen_eigs(E_lam, G).minCoeff();
  }
  c.nu2 = gen_eigs(E_lam, G).maxCoeff();
  c.nu0 = c.nu1 * gen_eigs(G, W).minCoeff();

  const double floor = 1e-3 * c.nu1;
  const MatrixXd S_grad = sym(Lam.transpose() * DtWD);
  const MatrixXd G_grad = D.transpose() * G * D;
  c.nu4 = 2.0 * std::max(-gen_eigs(S_grad, W).minCoeff(), floor);
  c.nu3 = 1.0 / gen_eigs(G_grad, S_grad + c.nu4 * W).maxCoeff();

  const MatrixXd D2 = D * D;
  const MatrixXd B1 = W + DtWD;
  const MatrixXd S2 = sym(Lam.transpose() * D2.transpose() * W * D2);
  const MatrixXd G2 = D2.transpose() * G * D2;
  c.nu6 = std::max(c.nu4, 2.0 * std::max(-gen_eigs(S2, B1).minCoeff(), floor));
  c.nu5 = std::min(c.nu3, 1.0 / gen_eigs(G2, S2 + c.nu6 * B1).maxCoeff());

  c.c_l = gen_eigs(E_L, G).maxCoeff();
  c.lambda_local = gen_eigs(Q.transpose() * E_L * Q, Q.transpose() * G * Q).minCoeff();

  const auto phi = model.kernel();
  Eigen::Map<const VectorXd> ph(phi.data(), w.size());
  c.c_phi = ph.dot(G * ph) / ph.dot(W * ph);

  const double ds = c.delta_star();
  c.c_delta.push_back({ds, c_of_delta(DtWD, K, W, ds)});
  const double d5 = c.nu5 * c.nu0 / (2.0 * c.nu1);
  if (std::abs(d5 - ds) > 1e-12 * ds) c.c_delta.push_back({d5, c_of_delta(DtWD, K, W, d5)});

  c.validate();

  // Certification on random band-limited fields.
  const MatrixXd D2m = D2;
  const double cds = c.c_delta_at(ds);
  auto& worst = c.worst_margin;
  for (int s = 0; s < opts.n_samples; ++s) {
    const DistributionField h = random_field(model.grid_ptr(), opts.seed + 2 * s);
    const DistributionField gg = random_field(model.grid_ptr(), opts.seed + 2 * s + 1);
    const DistributionField ph_h = h - project_local(model, h);
    const DistributionField dh = grad_v(h);
    const DistributionField d2h = apply(D2m, h);

    const double l2 = velocity_form(W, h, h);
    const double lam_h = velocity_form(G, h, h);
    record(worst, "nu0", margin(c.nu0 * l2, c.nu1 * lam_h));
    const DistributionField& hc = lam_degenerate ? ph_h : h;
    record(worst, "nu1", margin(c.nu1 * velocity_form(G, hc, hc), velocity_form(E_lam, hc, hc)));
    record(worst, "nu2", margin(velocity_form(E_lam, h, h), c.nu2 * lam_h));

    const double grad_pair = velocity_form(W, grad_v(apply(Lam, h)), dh);
    record(worst, "nu3_nu4", margin(c.nu3 * velocity_form(G, dh, dh), grad_pair + c.nu4 * l2));

    const double lhg = velocity_form(W, apply(L, h), gg);
    record(worst, "c_l", margin(std::abs(lhg), c.c_l * std::sqrt(lam_h * velocity_form(G, gg, gg))));

    const double kpair = velocity_form(W, grad_v(apply(K, h)), dh);
    record(worst, "c_delta", margin(kpair, cds * l2 + ds * velocity_form(W, dh, dh)));

    record(worst, "lambda", margin(c.lambda_local * velocity_form(G, ph_h, ph_h), velocity_form(E_L, h, h)));

    const double h1v = velocity_form(B1, h, h);
    const double pair2 = velocity_form(W, apply(D2m, apply(Lam, h)), d2h);
    record(worst, "nu5_nu6", margin(c.nu5 * velocity_form(G, d2h, d2h), pair2 + c.nu6 * h1v));
  }
  for (const auto& [key, m] : worst) {
    if (m < -opts.tolerance) {
      throw std::runtime_error("hypothesis inequality '" + key + "' violated on samples (margin " +
                               std::to_string(m) + ")");
    }
  }
  return c;
}

std::array<double, 6> weight_conditions(const WeightInputs& in, const LyapunovWeights& w) {
  return {w.beta * in.c1 - 2.0 * w.a * in.lambda,
          in.c2 * w.beta - w.gamma_mix,
          w.gamma_mix * in.c_l / w.eta - w.beta * in.nu3,
          w.eta * w.gamma_mix * in.c_l - 2.0 * w.alpha * in.lambda,
          w.gamma_mix * w.gamma_mix - w.alpha * w.beta,
          w.beta - w.alpha};
}

bool weights_satisfy(const WeightInputs& in, const LyapunovWeights& w) {
  const auto c = weight_conditions(in, w);
  // Round-off allowance relative to the operands, which can dwarf the -1 target.
  const std::array<double, 4> scale = {w.beta * in.c1 + 2.0 * w.a * in.lambda,
                                       in.c2 * w.beta + w.gamma_mix,
                                       w.gamma_mix * in.c_l / w.eta + w.beta * in.nu3,
                                       w.eta * w.gamma_mix * in.c_l + 2.0 * w.alpha * in.lambda};
  const double tol = 1e-12;
  for (int i = 0; i < 4; ++i) {
    if (!(c[i] <= -1.0 + tol * std::max(1.0, scale[i]))) return false;
  }
  return c[4] < 0.0 && c[5] <= 0.0;
}

LyapunovWeights select_weights(const WeightInputs& in, double margin) {
  if (!(in.lambda > 0.0)) throw std::invalid_argument("select_weights: lambda must be > 0");
  if (!(in.nu3 > 0.0) || !(in.c1 >= 0.0) || !(in.c2 >= 0.0) || !(in.c_l >= 0.0)) {
    throw std::invalid_argument("select_weights: constants must be positive");
  }
  if (!(margin >= 1.0)) throw std::invalid_argument("select_weights: margin must be >= 1");
  LyapunovWeights w;
  w.beta = 2.0 / in.nu3;
  w.a = margin * (w.beta * in.c1 + 1.0) / (2.0 * in.lambda);
  w.gamma_mix = margin * (in.c2 * w.beta + 1.0);
  w.eta = margin * w.gamma_mix * in.c_l / (w.beta * in.nu3 - 1.0);
  if (w.eta <= 0.0) w.eta = margin;  // c_l = 0: any eta works
  const double for_dissipation = (w.eta * w.gamma_mix * in.c_l + 1.0) / (2.0 * in.lambda);
  const double for_definiteness = w.gamma_mix * w.gamma_mix / w.beta * (1.0 + 1e-9);
  w.alpha = margin * std::max({for_dissipation, for_definiteness, w.beta});
  w.order = 1;
  const double vals[] = {w.a, w.alpha, w.beta, w.gamma_mix, w.eta};
  for (double v : vals) {
    if (!std::isfinite(v)) throw std::runtime_error("select_weights: non-finite weight");
  }
  return w;
}

WeightInputs weight_inputs(const CoercivityConstants& c) {
  const GradientConstants gc = gradient_constants(c);
  return {c.lambda_local, gc.c1, gc.c2, c.c_l, c.nu3};
}

LyapunovWeights select_weights(const CoercivityConstants& c, double margin) {
  c.validate();
  return select_weights(weight_inputs(c), margin);
}

double gap_bgk(double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  return 1.0 / kappa;
}

double lambda_from_local(const CoercivityConstants& c) {
  return (c.nu0 / c.nu1) * c.lambda_local;
}

FermionGapBound gap_bound_fermion(double rho, double kappa, const EquilibriumSpec& eq,
                                  const PhaseGrid& grid) {
  if (eq.kind != ModelKind::SemiClassical) {
    throw std::invalid_argument("gap_bound_fermion needs a semi-classical equilibrium");
  }
  const double kinf = eq.kappa_inf;
  const std::vector<double> md = discrete_maxwellian(grid);
  double mass = 0.0, cube = 0.0;
  for (std::size_t j = 0; j < md.size(); ++j) {
    const double f = kinf * md[j] / (1.0 + kinf * md[j]);
    mass += grid.w()[j] * f;
    cube += grid.w()[j] * f * f * f;
  }
  (void)rho;  // the discrete mass is what the discrete operator sees
  // Discrete Maxwellian peak: the analytic value scaled like the nodes.
  const double scale = md[0] / maxwellian(grid)[0];
  const double m0 = scale / std::sqrt(2.0 * std::numbers::pi);
  FermionGapBound b;
  b.coercivity = 1.0 - cube / mass;
  // The operator carries the mass as a prefactor, so the L2 gap bound and
  // sup nu both scale with it and the ratio does not.
  b.nu_bar = mass * (1.0 + kinf * m0) / (kappa * kinf);
  b.l2_bound = mass * b.coercivity / (kappa * kinf);
  b.bound = b.l2_bound / b.nu_bar;
  return b;
}

FermionGapBound gap_bound_fermion(const Model& model) {
  if (model.kind() != ModelKind::SemiClassical || model.spec().epsilon != 1) {
    throw std::invalid_argument("gap_bound_fermion needs the fermion semi-classical model");
  }
  return gap_bound_fermion(model.spec().rho, model.spec().kappa, model.equilibrium(), model.grid());
}

double numeric_gap(const Model& model, GapMetric metric) {
  const PhaseGrid& g = model.grid();
  if (g.n_v() > 512) throw std::invalid_argument("numeric_gap: n_v too large for dense solve");
  const VectorXd w = wvec(g);
  const MatrixXd E_L = -sym(w.asDiagonal() * model.L());
  MatrixXd metric_mat;
  if (metric == GapMetric::L2) {
    metric_mat = w.asDiagonal();
  } else if (model.multiplicative_lambda()) {
    const Eigen::Map<const VectorXd> nu(model.nu().data(), w.size());
    metric_mat = nu.cwiseProduct(w).asDiagonal();
  } else {
    metric_mat = model.lambda_gram();
  }
  const MatrixXd Q = complement_basis(model.kernel(), w);
  return gen_eigs(Q.transpose() * E_L * Q, Q.transpose() * metric_mat * Q).minCoeff();
}

double fp_dirichlet_constant(const Model& model) {
  if (model.kind() != ModelKind::FokkerPlanck) {
    throw std::invalid_argument("fp_dirichlet_constant needs the Fokker-Planck model");
  }
  return numeric_gap(model, GapMetric::L2);
}

double numeric_abscissa(const Eigen::MatrixXd& L, const PhaseGrid& grid, int kernel_dim) {
  const auto n = static_cast<Eigen::Index>(grid.n_v());
  if (grid.n_x() * grid.n_v() > 8192) {
    throw std::invalid_argument("numeric_abscissa: n_x * n_v exceeds the dense limit 8192");
  }
  double best = -std::numeric_limits<double>::infinity();
  {
    Eigen::EigenSolver<MatrixXd> es(L, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolve failed (k = 0)");
    std::vector<double> re;
    for (Eigen::Index i = 0; i < n; ++i) re.push_back(es.eigenvalues()[i].real());
    std::sort(re.begin(), re.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    for (std::size_t i = static_cast<std::size_t>(kernel_dim); i < re.size(); ++i) {
      best = std::max(best, re[i]);
    }
  }
  const VectorXd v = Eigen::Map<const VectorXd>(grid.v().data(), n);
  for (std::size_t m = 1; m < grid.n_modes(); ++m) {
    if (grid.is_nyquist(m)) continue;
    const double k = grid.wavenumber(m);
    Eigen::MatrixXcd T = L.cast<std::complex<double>>();
    for (Eigen::Index j = 0; j < n; ++j) T(j, j) -= std::complex<double>(0.0, k * v[j]);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(T, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolve failed (k != 0)");
    for (Eigen::Index i = 0; i < n; ++i) best = std::max(best, es.eigenvalues()[i].real());
  }
  return best;
}

double numeric_abscissa(const Model& model) {
  return numeric_abscissa(model.L(), model.grid(), 1);
}

}  // namespace hypokin
