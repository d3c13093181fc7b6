#include "hypokin/solver.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "hypokin/sampling.hpp"

namespace hypokin {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

VectorXd wvec(const PhaseGrid& g) {
  return Eigen::Map<const VectorXd>(g.w().data(), static_cast<Eigen::Index>(g.n_v()));
}

// Kernel projector phi (W phi)^T with unit weighted phi.
MatrixXd kernel_projector(const Model& model) {
  const VectorXd w = wvec(model.grid());
  const Eigen::Map<const VectorXd> phi(model.kernel().data(), w.size());
  return phi * phi.cwiseProduct(w).transpose();
}

// exp(t L) for L self-adjoint in the weighted pairing.
MatrixXd weighted_sym_exp(const MatrixXd& L, const VectorXd& w, double t) {
  const VectorXd sw = w.cwiseSqrt();
  MatrixXd s = sw.asDiagonal() * L * sw.cwiseInverse().asDiagonal();
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw std::runtime_error("collision propagator eigensolve failed");
  const VectorXd e = (t * es.eigenvalues().array()).exp().matrix();
  const MatrixXd ex = es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose();
  return sw.cwiseInverse().asDiagonal() * ex * sw.asDiagonal();
}

const RunConfig& validated(const RunConfig& cfg) {
  cfg.validate();
  return cfg;
}

class Runner {
 public:
  explicit Runner(const RunConfig& cfg)
      : cfg_(validated(cfg)), grid_(cfg.make_grid()), model_(cfg.model, grid_) {
    result_.equilibrium = model_.equilibrium();
    MeasureOptions mo;
    mo.seed = cfg.seed ^ 0x5eedULL;
    mo.n_samples = cfg.measure_samples;
    result_.constants = measure_constants(model_, mo);
    result_.weights = select_weights(result_.constants, cfg.weight_margin);
    result_.weights.order = cfg.order;
    if (cfg.order == 2) fk_ = fk_schedule(result_.constants, result_.weights);
  }

  const Model& model() const { return model_; }
  RunResult& result() { return result_; }
  const RunConfig& cfg() const { return cfg_; }

  DistributionField initial() const {
    DistributionField h = make_initial(model_, cfg_.initial, cfg_.seed);
    if (cfg_.project_initial) h -= project_global(model_, h);
    return h;
  }

  // Per-step checks shared by every run; records series at sampling steps.
  void observe(long step, double t, const DistributionField& h, bool sample,
               const std::function<void(DecayReport&)>& extra) {
    if (!h.all_finite()) {
      throw std::runtime_error("non-finite value in the solution at step " + std::to_string(step));
    }
    DecayReport& r = result_.report;
    const double f1 = lyapunov_f1(h, result_.weights);
    if (last_f1_ >= 0 && f1 - last_f1_ > cfg_.tol.monotone * last_f1_) ++r.monotone_violations;
    last_f1_ = f1;
    const double l2sq = inner_l2(h, h);
    if (last_l2_ >= 0 && l2sq - last_l2_ > cfg_.tol.monotone * last_l2_) ++r.l2_violations;
    last_l2_ = l2sq;
    double f2 = 0;
    if (cfg_.order == 2) {
      f2 = lyapunov_fk(h, fk_, 2);
      if (last_f2_ >= 0 && f2 - last_f2_ > cfg_.tol.monotone_f2 * last_f2_) ++r.monotone_violations_f2;
      last_f2_ = f2;
    }
    if (!sample) return;
    r.times.push_back(t);
    r.l2.push_back(std::sqrt(l2sq));
    r.h1.push_back(norm_h1(h));
    r.lyapunov.push_back(f1);
    r.lambda.push_back(lambda_norm(model_, h));
    if (cfg_.order == 2) r.lyapunov2.push_back(f2);
    if (extra) extra(r);
  }

  void finish() {
    DecayReport& r = result_.report;
    if (r.times.size() >= 10) {
      try {
        r.fit = fit_rate(r.times, r.h1, cfg_.fit);
      } catch (const std::domain_error&) {
        r.fit = RateFit{};  // decayed to zero: nothing to fit
      }
    }
  }

  template <class Step, class Extra>
  void loop(DistributionField& h, Step&& step, Extra&& extra) {
    const long n_steps = std::lround(cfg_.t_end / cfg_.dt);
    observe(0, 0.0, h, true, extra);
    for (long s = 1; s <= n_steps; ++s) {
      step(h, s);
      const bool sample = s % cfg_.sample_every == 0 || s == n_steps;
      observe(s, static_cast<double>(s) * cfg_.dt, h, sample, extra);
    }
    finish();
  }

 private:
  RunConfig cfg_;
  GridPtr grid_;
  Model model_;
  RunResult result_;
  FkSchedule fk_;
  double last_f1_ = -1, last_f2_ = -1, last_l2_ = -1;
};

double relative_drift(double now, double start, double scale) {
  return std::abs(now - start) / std::max({std::abs(start), scale, 1e-300});
}

}  // namespace

std::string to_string(Scheme s) {
  return s == Scheme::StrangExact ? "strang_exact_transport" : "imex_euler";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "strang_exact_transport" || s == "strang") return Scheme::StrangExact;
  if (s == "imex_euler" || s == "imex") return Scheme::ImexEuler;
  throw std::invalid_argument("scheme: unknown value '" + s + "'");
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::ModeVM: return "mode_vm";
    case InitialKind::ModeKernel: return "mode_kernel";
    case InitialKind::KernelConst: return "kernel_const";
    case InitialKind::Random: return "random";
    case InitialKind::Zero: return "zero";
  }
  return "?";
}

InitialKind initial_kind_from_string(const std::string& s) {
  for (auto k : {InitialKind::ModeVM, InitialKind::ModeKernel, InitialKind::KernelConst,
                 InitialKind::Random, InitialKind::Zero}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("initial.kind: unknown recipe '" + s + "'");
}

void RunConfig::validate() const {
  model.validate();
  if (n_x < 4) throw std::invalid_argument("grid.n_x must be >= 4");
  if (n_v < 8) throw std::invalid_argument("grid.n_v must be >= 8");
  if (!(v_max > 0)) throw std::invalid_argument("grid.v_max must be > 0");
  if (!(length_x > 0)) throw std::invalid_argument("grid.length_x must be > 0");
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("time.dt must be > 0");
  if (!(t_end >= dt)) throw std::invalid_argument("time.t_end must be >= time.dt");
  if (sample_every < 1) throw std::invalid_argument("time.sample_every must be >= 1");
  if (order < 1 || order > 2) throw std::invalid_argument("order must be 1 or 2");
  if (!(potential_bound > 0)) throw std::invalid_argument("bounds.potential must be > 0");
  if (!(amplitude_bound > 0)) throw std::invalid_argument("bounds.amplitude must be > 0");
  if (!(weight_margin >= 1)) throw std::invalid_argument("weights.margin must be >= 1");
  if (measure_samples < 1) throw std::invalid_argument("measure.n_samples must be >= 1");
  if (initial.mode < 0) throw std::invalid_argument("initial.mode must be >= 0");
  if (2 * static_cast<std::size_t>(initial.mode) >= n_x) {
    throw std::invalid_argument("initial.mode must be below n_x / 2");
  }
  if (!linear && model.kind != ModelKind::SemiClassical) {
    throw std::invalid_argument("linear = false is available for the semiclassical model only");
  }
  if (!linear && (model.potential || model.poisson)) {
    throw std::invalid_argument("linear = false cannot be combined with a potential or poisson");
  }
  if (model.potential && model.kind != ModelKind::Relaxation) {
    throw std::invalid_argument("model.potential requires the relaxation model");
  }
  if (model.potential && model.poisson) {
    throw std::invalid_argument("model.potential and model.poisson are mutually exclusive");
  }
}

GridPtr RunConfig::make_grid() const { return build_grid(n_x, length_x, n_v, v_max, quadrature); }

DistributionField make_initial(const Model& model, const InitialCondition& ic, std::uint64_t seed) {
  const PhaseGrid& g = model.grid();
  const auto phi = model.kernel();
  const auto M = model.sqrt_maxwell();
  const double k = static_cast<double>(ic.mode) * g.wavenumber(1);
  DistributionField h(model.grid_ptr());
  switch (ic.kind) {
    case InitialKind::ModeVM:
      for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_v(); ++j) h(i, j) = std::sin(k * g.x(i)) * g.v()[j] * M[j];
      break;
    case InitialKind::ModeKernel:
      for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_v(); ++j) h(i, j) = std::sin(k * g.x(i)) * phi[j];
      break;
    case InitialKind::KernelConst:
      for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_v(); ++j) h(i, j) = phi[j];
      break;
    case InitialKind::Random:
      h = random_field(model.grid_ptr(), seed);
      break;
    case InitialKind::Zero:
      return h;
  }
  if (ic.normalise) {
    const double n = norm_l2(h);
    if (n > 0) h *= 1.0 / n;
  }
  h *= ic.amplitude;
  return h;
}

DistributionField transport_step(const DistributionField& h, double dt) {
  const PhaseGrid& g = h.grid();
  const auto& fft = g.spectral();
  std::vector<cplx> sp(fft.spectrum_size());
  fft.forward(h.values(), sp);
  const auto v = g.v();
  for (std::size_t m = 0; m < g.n_modes(); ++m) {
    cplx* block = sp.data() + m * g.n_v();
    if (g.is_nyquist(m)) {
      std::fill(block, block + g.n_v(), cplx(0.0, 0.0));
      continue;
    }
    if (m == 0) continue;
    const double k = g.wavenumber(m);
    for (std::size_t j = 0; j < g.n_v(); ++j) block[j] *= std::polar(1.0, -k * v[j] * dt);
  }
  DistributionField out(h.grid_ptr());
  fft.inverse(sp, out.values());
  return out;
}

LinearPropagator::LinearPropagator(const Model& model, double dt, Scheme scheme) {
  const PhaseGrid& g = model.grid();
  const VectorXd w = wvec(g);
  const auto n = w.size();
  const MatrixXd I = MatrixXd::Identity(n, n);
  MatrixXd e;
  if (scheme == Scheme::StrangExact) {
    e = weighted_sym_exp(model.L(), w, dt);
  } else {
    e = (I - dt * model.L()).partialPivLu().inverse();
  }
  const MatrixXd pi = kernel_projector(model);
  p_ = pi + (I - pi) * e * (I - pi);
}

DistributionField LinearPropagator::apply(const DistributionField& h) const {
  return apply_velocity_matrix(p_, h);
}

DistributionField collision_step(const Model& model, const DistributionField& h, double dt) {
  return LinearPropagator(model, dt, Scheme::StrangExact).apply(h);
}

PoissonField solve_poisson(const PhaseGrid& grid, std::span<const double> source) {
  const std::size_t n = grid.n_x();
  if (source.size() != n) throw std::invalid_argument("solve_poisson: source size mismatch");
  XSpectral fft(n, 1);
  std::vector<cplx> sp(fft.spectrum_size());
  fft.forward(source, sp);
  double scale = 0;
  for (double s : source) scale = std::max(scale, std::abs(s));
  const double mean = sp[0].real() / static_cast<double>(n);
  if (std::abs(mean) > 1e-10 * std::max(1.0, scale)) {
    throw std::runtime_error("Poisson source has nonzero mean " + std::to_string(mean) +
                             " (gauge violation)");
  }
  std::vector<cplx> vs(sp.size()), gs(sp.size());
  for (std::size_t m = 1; m < grid.n_modes(); ++m) {
    if (grid.is_nyquist(m)) continue;
    const double k = grid.wavenumber(m);
    vs[m] = -sp[m] / (k * k);
    gs[m] = cplx(0.0, k) * vs[m];
  }
  PoissonField out;
  out.potential.resize(n);
  out.gradient.resize(n);
  fft.inverse(vs, out.potential);
  fft.inverse(gs, out.gradient);
  for (double g : out.gradient) out.energy += g * g;
  out.energy *= grid.dx();
  return out;
}

RunResult run_linear(const RunConfig& config) {
  if (config.model.poisson) return run_poisson(config);
  if (config.model.potential) return run_with_potential(config);
  Runner runner(config);
  const Model& model = runner.model();
  DistributionField h = runner.initial();
  const LinearPropagator prop(model, config.dt, config.scheme);
  const double m0 = kernel_moment(model, h);
  const double scale = norm_l2(h);
  auto step = [&](DistributionField& u, long) {
    if (config.scheme == Scheme::StrangExact) {
      u = transport_step(u, 0.5 * config.dt);
      if (!config.transport_only) u = prop.apply(u);
      u = transport_step(u, 0.5 * config.dt);
    } else {
      u = transport_step(u, config.dt);
      if (!config.transport_only) u = prop.apply(u);
    }
  };
  auto extra = [&](DecayReport& r) { r.mass.push_back(kernel_moment(model, h)); };
  runner.loop(h, step, extra);
  runner.result().mass_drift = relative_drift(kernel_moment(model, h), m0, scale);
  return runner.result();
}

RunResult run_with_potential(const RunConfig& config) {
  if (!config.model.potential) throw std::invalid_argument("model.potential is required");
  if (config.model.potential->c2_bound > config.potential_bound) {
    throw std::invalid_argument("model.potential: C2 size " +
                                std::to_string(config.model.potential->c2_bound) +
                                " exceeds the smallness bound " +
                                std::to_string(config.potential_bound));
  }
  Runner runner(config);
  const Model& model = runner.model();
  const PhaseGrid& g = model.grid();
  DistributionField h = runner.initial();
  const LinearPropagator prop(model, config.dt, Scheme::StrangExact);
  const std::vector<double> dV = potential_gradient(model);
  // Force flow V'(x) d_v over half a step: a weighted rotation at each x.
  std::vector<RowMatrix> force(g.n_x());
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    if (dV[i] != 0.0) force[i] = RowMatrix((0.5 * config.dt * dV[i] * g.dv_skew()).exp());
  }
  auto apply_force = [&](DistributionField& u) {
    const auto n = static_cast<Eigen::Index>(g.n_v());
    for (std::size_t i = 0; i < g.n_x(); ++i) {
      if (force[i].size() == 0) continue;
      Eigen::Map<VectorXd> r(u.row(i).data(), n);
      const VectorXd tmp = force[i] * r;
      r = tmp;
    }
  };
  const double m0 = kernel_moment(model, h);
  const double scale = norm_l2(h);
  auto step = [&](DistributionField& u, long) {
    u = transport_step(u, 0.5 * config.dt);
    apply_force(u);
    if (!config.transport_only) u = prop.apply(u);
    apply_force(u);
    u = transport_step(u, 0.5 * config.dt);
  };
  auto extra = [&](DecayReport& r) { r.mass.push_back(kernel_moment(model, h)); };
  runner.loop(h, step, extra);
  runner.result().mass_drift = relative_drift(kernel_moment(model, h), m0, scale);
  return runner.result();
}

RunResult run_poisson(const RunConfig& config) {
  if (!config.model.poisson || config.model.kind != ModelKind::Relaxation) {
    throw std::invalid_argument("model.poisson requires the relaxation model");
  }
  Runner runner(config);
  const Model& model = runner.model();
  const PhaseGrid& g = model.grid();
  const auto nv = static_cast<Eigen::Index>(g.n_v());
  DistributionField h = runner.initial();
  const LinearPropagator prop(model, config.dt, Scheme::StrangExact);

  const VectorXd w = wvec(g);
  const VectorXd v = Eigen::Map<const VectorXd>(g.v().data(), nv);
  const VectorXd M = Eigen::Map<const VectorXd>(model.sqrt_maxwell().data(), nv);
  // Transport plus field per Fourier mode: A_k = -ik v - (i/k) v M (w M)^T.
  std::vector<Eigen::MatrixXcd> half(g.n_modes());
  for (std::size_t m = 1; m < g.n_modes(); ++m) {
    if (g.is_nyquist(m)) continue;
    const double k = g.wavenumber(m);
    Eigen::MatrixXcd a = (-cplx(0.0, 1.0 / k)) * (v.cwiseProduct(M) * M.cwiseProduct(w).transpose()).cast<cplx>();
    for (Eigen::Index j = 0; j < nv; ++j) a(j, j) += cplx(0.0, -k * v[j]);
    half[m] = (0.5 * config.dt * a).exp();
  }
  auto density = [&](const DistributionField& u) {
    std::vector<double> rho(g.n_x());
    for (std::size_t i = 0; i < g.n_x(); ++i) rho[i] = inner_v(u.row(i), model.sqrt_maxwell(), g);
    return rho;
  };
  auto field_half = [&](DistributionField& u) {
    const auto& fft = g.spectral();
    std::vector<cplx> sp(fft.spectrum_size());
    fft.forward(u.values(), sp);
    // The mean density must vanish: the field is only defined in the zero-mean gauge.
    const Eigen::Map<const Eigen::VectorXcd> b0(sp.data(), nv);
    const double rho0 =
        std::abs(b0.dot(M.cwiseProduct(w).cast<cplx>())) / static_cast<double>(g.n_x());
    if (rho0 > 1e-10 * std::max(1.0, u.max_abs())) {
      throw std::runtime_error("Poisson coupling: nonzero mean density (gauge violation)");
    }
    for (std::size_t m = 1; m < g.n_modes(); ++m) {
      Eigen::Map<Eigen::VectorXcd> b(sp.data() + m * g.n_v(), nv);
      if (g.is_nyquist(m)) {
        b.setZero();
        continue;
      }
      const Eigen::VectorXcd tmp = half[m] * b;
      b = tmp;
    }
    fft.inverse(sp, u.values());
  };
  const double m0 = kernel_moment(model, h);
  const double scale = norm_l2(h);
  auto step = [&](DistributionField& u, long) {
    field_half(u);
    if (!config.transport_only) u = prop.apply(u);
    field_half(u);
  };
  double last_energy = -1;
  auto extra = [&](DecayReport& r) {
    const PoissonField pf = solve_poisson(g, density(h));
    r.field_energy.push_back(pf.energy);
    r.mass.push_back(kernel_moment(model, h));
  };
  // The energy check runs every step, independent of sampling.
  auto checked_step = [&](DistributionField& u, long s) {
    step(u, s);
    const double e = inner_l2(u, u) + solve_poisson(g, density(u)).energy;
    if (last_energy >= 0 && e - last_energy > config.tol.monotone * last_energy) {
      ++runner.result().report.energy_violations;
    }
    last_energy = e;
  };
  last_energy = inner_l2(h, h) + solve_poisson(g, density(h)).energy;
  runner.loop(h, checked_step, extra);
  runner.result().mass_drift = relative_drift(kernel_moment(model, h), m0, scale);
  return runner.result();
}

RunResult run_nonlinear_sc(const RunConfig& config) {
  if (config.model.kind != ModelKind::SemiClassical) {
    throw std::invalid_argument("nonlinear runs need the semiclassical model");
  }
  Runner runner(config);
  const Model& model = runner.model();
  const PhaseGrid& g = model.grid();
  DistributionField h = runner.initial();
  if (norm_h1(h) > config.amplitude_bound) {
    throw std::invalid_argument("initial.amplitude: perturbation H1 size " +
                                std::to_string(norm_h1(h)) + " exceeds bounds.amplitude " +
                                std::to_string(config.amplitude_bound));
  }
  const LinearPropagator half_prop(model, 0.5 * config.dt, Scheme::StrangExact);
  const auto finf = model.f_inf();
  const auto m = model.scaling();
  const bool fermion = model.spec().epsilon == 1;

  auto mass_of = [&](const DistributionField& u) {
    double s = 0;
    for (std::size_t i = 0; i < g.n_x(); ++i) {
      const auto r = u.row(i);
      for (std::size_t j = 0; j < g.n_v(); ++j) s += g.w()[j] * (finf[j] + m[j] * r[j]);
    }
    return s * g.dx();
  };
  auto range_of = [&](const DistributionField& u) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < g.n_x(); ++i) {
      const auto r = u.row(i);
      for (std::size_t j = 0; j < g.n_v(); ++j) {
        const double f = finf[j] + m[j] * r[j];
        lo = std::min(lo, f);
        hi = std::max(hi, f);
      }
    }
    return std::pair{lo, hi};
  };
  auto check_range = [&](const DistributionField& u, long s) {
    if (!fermion) return;
    const auto [lo, hi] = range_of(u);
    if (lo < -config.tol.range || hi > 1.0 + config.tol.range) {
      throw std::runtime_error("fermion occupation left [0, 1] at step " + std::to_string(s) +
                               " (min " + std::to_string(lo) + ", max " + std::to_string(hi) + ")");
    }
  };
  check_range(h, 0);
  const double mass0 = mass_of(h);
  double h4 = 0;

  auto step = [&](DistributionField& u, long s) {
    u = transport_step(u, 0.5 * config.dt);
    u = half_prop.apply(u);
    const DistributionField k1 = gamma_bilinear(model, u, u);
    const double size = std::max(u.max_abs(), 1e-300);
    const double rate = 2.0 * k1.max_abs() / size;
    if (config.dt * rate > 1.0) {
      throw std::runtime_error("nonlinear step unstable at step " + std::to_string(s) +
                               " (dt * rate = " + std::to_string(config.dt * rate) + ")");
    }
    const double denom = norm_l2(u) * lambda_norm(model, u);
    if (denom > 0) h4 = std::max(h4, norm_l2(k1) / denom);
    DistributionField pred = u + config.dt * k1;
    const DistributionField k2 = gamma_bilinear(model, pred, pred);
    u += (0.5 * config.dt) * (k1 + k2);
    u = half_prop.apply(u);
    u = transport_step(u, 0.5 * config.dt);
    check_range(u, s);
    const double drift = relative_drift(mass_of(u), mass0, 0.0);
    if (drift > config.tol.mass) {
      throw std::runtime_error("mass drift " + std::to_string(drift) + " at step " +
                               std::to_string(s));
    }
  };
  auto extra = [&](DecayReport& r) {
    r.mass.push_back(mass_of(h));
    const auto [lo, hi] = range_of(h);
    r.fmin.push_back(lo);
    r.fmax.push_back(hi);
  };
  runner.loop(h, step, extra);
  runner.result().mass_drift = relative_drift(mass_of(h), mass0, 0.0);
  runner.result().h4_constant = h4;
  return runner.result();
}

RunResult run(const RunConfig& config) {
  if (config.model.poisson) return run_poisson(config);
  if (config.model.potential) return run_with_potential(config);
  if (!config.linear) return run_nonlinear_sc(config);
  return run_linear(config);
}

}  // namespace hypokin
