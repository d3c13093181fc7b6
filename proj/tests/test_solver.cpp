#include <cmath>
#include <numbers>

#include <doctest.h>

#include "hypokin/sampling.hpp"
#include "hypokin/solver.hpp"

using namespace hypokin;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

ModelSpec spec(ModelKind kind, double kappa = 1.0, int eps = 0, double rho = 1.0) {
  ModelSpec s;
  s.kind = kind;
  s.kappa = kappa;
  s.epsilon = eps;
  s.rho = rho;
  return s;
}

double max_diff(const DistributionField& a, const DistributionField& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  }
  return m;
}

RunConfig small_run() {
  RunConfig c;
  c.n_x = 16;
  c.n_v = 32;
  c.t_end = 20.0;
  c.dt = 1e-2;
  c.sample_every = 10;
  return c;
}
}  // namespace

TEST_CASE("free transport of a resolved mode") {
  const GridPtr g = build_grid(16, kTwoPi, 32, 6.0);
  const double dt = 0.37;
  auto prof = [](double v) { return std::exp(-v * v / 4); };
  const auto h = DistributionField::from_function(g, [&](double x, double v) { return std::sin(x) * prof(v); });
  const auto exact = DistributionField::from_function(
      g, [&](double x, double v) { return std::sin(x - v * dt) * prof(v); });
  CHECK(max_diff(transport_step(h, dt), exact) <= 1e-12);

  const DistributionField r = random_field(g, 8);
  const DistributionField t = transport_step(r, 0.9);
  CHECK(std::abs(norm_l2(t) - norm_l2(r)) <= 1e-12 * norm_l2(r));
  CHECK(max_diff(transport_step(t, -0.9), r) <= 1e-12);
}

TEST_CASE("exact collision step") {
  const GridPtr g = build_grid(8, kTwoPi, 32, 8.0);
  const double kappa = 0.8, dt = 0.05;
  Model m(spec(ModelKind::Relaxation, kappa), g);
  DistributionField h = random_field(g, 2);
  h -= project_local(m, h);
  DistributionField expect = h;
  expect *= std::exp(-dt / kappa);
  CHECK(max_diff(collision_step(m, h, dt), expect) <= 1e-10);

  for (ModelKind k : {ModelKind::Relaxation, ModelKind::FokkerPlanck, ModelKind::SemiClassical}) {
    Model mk(spec(k, 1.0, k == ModelKind::SemiClassical ? 1 : 0), g);
    DistributionField eq(g);
    for (std::size_t i = 0; i < g->n_x(); ++i) {
      for (std::size_t j = 0; j < g->n_v(); ++j) eq(i, j) = mk.kernel()[j];
    }
    CHECK(max_diff(collision_step(mk, eq, dt), eq) <= 1e-10);
    const DistributionField r = random_field(g, 5);
    const DistributionField d = collision_step(mk, r, dt) - r;
    for (std::size_t i = 0; i < g->n_x(); ++i) {
      CHECK(std::abs(inner_v(d.row(i), mk.kernel(), *g)) / dt <= 1e-12);
    }
  }
}

TEST_CASE("Poisson solve of a single mode") {
  const GridPtr g = build_grid(16, kTwoPi, 8, 4.0);
  std::vector<double> src(16), zero(16, 0.0), shifted(16);
  for (std::size_t i = 0; i < 16; ++i) {
    src[i] = std::cos(g->x(i));
    shifted[i] = src[i] + 0.5;
  }
  const PoissonField p = solve_poisson(*g, src);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(std::abs(p.potential[i] + std::cos(g->x(i))) <= 1e-12);
    CHECK(std::abs(p.gradient[i] - std::sin(g->x(i))) <= 1e-12);
  }
  const PoissonField z = solve_poisson(*g, zero);
  for (double v : z.potential) CHECK(v == 0.0);
  CHECK_THROWS_AS(solve_poisson(*g, shifted), std::runtime_error);
}

TEST_CASE("kernel initial data is stationary") {
  RunConfig c = small_run();
  c.t_end = 2.0;
  c.initial.kind = InitialKind::KernelConst;
  c.project_initial = false;
  const RunResult r = run(c);
  for (const auto* s : {&r.report.l2, &r.report.h1, &r.report.lyapunov, &r.report.mass}) {
    for (double v : *s) CHECK(std::abs(v - s->front()) <= 1e-10 * std::max(1.0, std::abs(s->front())));
  }
}

TEST_CASE("fitted rate is converged in the time step") {
  RunConfig a = small_run();
  a.dt = 2e-3;
  a.sample_every = 50;
  RunConfig b = a;
  b.dt = 1e-3;
  b.sample_every = 100;
  const double ta = run(a).report.fit.tau, tb = run(b).report.fit.tau;
  CHECK(std::abs(ta - tb) / tb < 0.01);
}

TEST_CASE("Strang splitting is second order") {
  auto final_l2 = [](double dt) {
    RunConfig c = small_run();
    c.t_end = 2.0;
    c.dt = dt;
    c.sample_every = static_cast<int>(std::lround(0.2 / dt));
    c.initial.kind = InitialKind::Random;
    return run(c).report.l2.back();
  };
  const double ref = final_l2(0.2 / 64);
  const double e1 = std::abs(final_l2(0.2 / 4) - ref);
  const double e2 = std::abs(final_l2(0.2 / 8) - ref);
  CHECK(e1 / e2 > 3.0);
  CHECK(e1 / e2 < 5.0);
}

TEST_CASE("zero potential reproduces the potential-free run exactly") {
  RunConfig c = small_run();
  c.t_end = 5.0;
  const RunResult base = run(c);
  const GridPtr g = c.make_grid();
  c.model.potential = PotentialSpec::from_values(*g, std::vector<double>(c.n_x, 0.0));
  const RunResult pot = run(c);
  CHECK(pot.report.l2 == base.report.l2);
  CHECK(pot.report.h1 == base.report.h1);
  CHECK(pot.report.lyapunov == base.report.lyapunov);
}

TEST_CASE("weak potential keeps the L2 norm non-increasing") {
  RunConfig c = small_run();
  const GridPtr g = c.make_grid();
  c.model.potential = PotentialSpec::cosine(*g, 0.01);
  const RunResult r = run(c);
  CHECK(r.report.l2_violations == 0);
  RunConfig strong = c;
  strong.model.potential = PotentialSpec::cosine(*g, 0.5);
  CHECK_THROWS_AS(run(strong), std::invalid_argument);
}

TEST_CASE("Poisson coupling: energy decay and zero data") {
  RunConfig c = small_run();
  c.model.poisson = true;
  c.t_end = 5.0;
  c.initial.kind = InitialKind::ModeKernel;
  CHECK(run(c).report.energy_violations == 0);
  c.initial.kind = InitialKind::Zero;
  const RunResult z = run(c);
  for (double e : z.report.field_energy) CHECK(e == 0.0);
}

TEST_CASE("nonlinear run with classical statistics matches the linear run") {
  RunConfig c = small_run();
  c.t_end = 5.0;
  c.model = spec(ModelKind::SemiClassical, 1.0, 0, 1.0);
  c.initial.kind = InitialKind::ModeKernel;
  c.initial.amplitude = 1e-2;
  c.initial.normalise = true;
  const RunResult lin = run(c);
  c.linear = false;
  const RunResult non = run(c);
  REQUIRE(lin.report.h1.size() == non.report.h1.size());
  for (std::size_t i = 0; i < lin.report.h1.size(); ++i) {
    CHECK(std::abs(lin.report.h1[i] - non.report.h1[i]) <= 1e-8 * lin.report.h1.front());
  }
}

TEST_CASE("nonlinear run from equilibrium stays there") {
  RunConfig c = small_run();
  c.t_end = 2.0;
  c.model = spec(ModelKind::SemiClassical, 1.0, 1, 1.0);
  c.linear = false;
  c.initial.kind = InitialKind::Zero;
  const RunResult r = run(c);
  for (double v : r.report.h1) CHECK(v == 0.0);
  for (std::size_t i = 0; i < r.report.fmin.size(); ++i) {
    CHECK(r.report.fmin[i] == r.report.fmin.front());
    CHECK(r.report.fmax[i] == r.report.fmax.front());
  }
}

TEST_CASE("nonlinear fermion run aborts when the occupation leaves its range") {
  RunConfig c = small_run();
  c.t_end = 1.0;
  c.model = spec(ModelKind::SemiClassical, 1.0, 1, 1.0);
  c.linear = false;
  c.initial.kind = InitialKind::ModeKernel;
  c.initial.amplitude = 5.0;
  c.amplitude_bound = 1e3;
  CHECK_THROWS_WITH_AS(run(c), doctest::Contains("step"), std::runtime_error);
  c.amplitude_bound = 0.1;
  CHECK_THROWS_AS(run(c), std::invalid_argument);
}

TEST_CASE("run configuration validation names the field") {
  RunConfig c = small_run();
  c.dt = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("time.dt"), std::invalid_argument);
  c = small_run();
  c.model = spec(ModelKind::Relaxation);
  c.linear = false;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(scheme_from_string("strang") == Scheme::StrangExact);
  CHECK(scheme_from_string("imex") == Scheme::ImexEuler);
  CHECK_THROWS_AS(scheme_from_string("rk4"), std::invalid_argument);
}

TEST_CASE("backward Euler collision step decays monotonically") {
  RunConfig c = small_run();
  c.scheme = Scheme::ImexEuler;
  const RunResult r = run(c);
  CHECK(r.report.monotone_violations == 0);
  CHECK(r.report.fit.tau > 0.0);
}
