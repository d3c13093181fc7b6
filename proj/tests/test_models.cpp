#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "hypokin/models.hpp"
#include "hypokin/sampling.hpp"

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

DistributionField broadcast(const GridPtr& g, std::span<const double> prof) {
  DistributionField h(g);
  for (std::size_t i = 0; i < g->n_x(); ++i) {
    for (std::size_t j = 0; j < g->n_v(); ++j) h(i, j) = prof[j];
  }
  return h;
}

double quad_mass(const PhaseGrid& g, std::span<const double> f) {
  double s = 0;
  for (std::size_t j = 0; j < g.n_v(); ++j) s += g.w()[j] * f[j];
  return s;
}
}  // namespace

TEST_CASE("Maxwellian values and moments") {
  const GridPtr g = build_grid(4, kTwoPi, 65, 8.0);
  const auto m = maxwellian(*g);
  CHECK(m[32] == doctest::Approx(1.0 / std::sqrt(kTwoPi)).epsilon(1e-14));
  CHECK(std::abs(quad_mass(*g, m) - 1.0) <= 1e-8);
  double first = 0;
  for (std::size_t j = 0; j < g->n_v(); ++j) first += g->w()[j] * g->v()[j] * m[j];
  CHECK(std::abs(first) <= 1e-12);
}

TEST_CASE("relaxation operator: kernel, gap and split") {
  const GridPtr g = build_grid(8, kTwoPi, 48, 8.0);
  const double kappa = 0.7;
  Model m(spec(ModelKind::Relaxation, kappa), g);
  const DistributionField M = broadcast(g, m.sqrt_maxwell());
  CHECK(apply_L(m, M).max_abs() <= 1e-10);

  DistributionField h = random_field(g, 3);
  h -= project_local(m, h);
  DistributionField expect = h;
  expect *= -1.0 / kappa;
  CHECK(max_diff(apply_L(m, h), expect) <= 1e-12);

  const DistributionField r = random_field(g, 4);
  const auto [K, Lam] = split_K_Lambda(m, r);
  DistributionField lam_expect = r;
  lam_expect *= 1.0 / kappa;
  CHECK(max_diff(Lam, lam_expect) <= 1e-12);
  DistributionField kk = K;
  kk *= kappa;
  CHECK(max_diff(project_local(m, r), kk) <= 1e-12);
}

TEST_CASE("Fokker-Planck operator annihilates the Maxwellian and has no K part") {
  const GridPtr g = build_grid(4, kTwoPi, 128, 10.0);
  Model m(spec(ModelKind::FokkerPlanck), g);
  const DistributionField M = broadcast(g, m.sqrt_maxwell());
  CHECK(apply_L(m, M).max_abs() <= 1e-6);
  const auto [K, Lam] = split_K_Lambda(m, random_field(g, 9));
  CHECK(K.max_abs() == 0.0);
}

TEST_CASE("semiclassical operator with epsilon zero reduces to relaxation") {
  const GridPtr g = build_grid(8, kTwoPi, 32, 8.0);
  Model sc(spec(ModelKind::SemiClassical, 1.3, 0, 1.0), g);
  Model bgk(spec(ModelKind::Relaxation, 1.3), g);
  const DistributionField h = random_field(g, 5);
  CHECK(max_diff(apply_L(sc, h), apply_L(bgk, h)) <= 1e-12);
  CHECK(gamma_bilinear(sc, h, h).max_abs() == 0.0);
  const auto f = DistributionField::from_function(g, [](double x, double v) {
    return (1.0 + 0.3 * std::sin(x)) * std::exp(-v * v / 3);
  });
  CHECK(max_diff(apply_Q_nonlinear(sc, f), apply_Q_nonlinear(bgk, f)) <= 1e-12);
}

TEST_CASE("fermion collision frequency is bounded below") {
  const GridPtr g = build_grid(4, kTwoPi, 64, 8.0);
  for (double kappa : {0.5, 1.0, 2.0}) {
    Model m(spec(ModelKind::SemiClassical, kappa, 1, 1.0), g);
    const double floor = 1.0 / (kappa * m.equilibrium().kappa_inf);
    for (double nu : m.nu()) CHECK(nu >= floor * (1 - 1e-14));
  }
}

TEST_CASE("local and global projections") {
  const GridPtr g = build_grid(8, kTwoPi, 32, 8.0);
  for (ModelKind k : {ModelKind::Relaxation, ModelKind::FokkerPlanck}) {
    Model m(spec(k), g);
    const DistributionField h = random_field(g, 11);
    const DistributionField p = project_local(m, h);
    CHECK(max_diff(project_local(m, p), p) <= 1e-12);
    CHECK(project_local(m, h - p).max_abs() <= 1e-12);
    CHECK(max_diff(project_global(m, p), project_global(m, h)) <= 1e-12);
    const auto odd = DistributionField::from_function(g, [](double x, double v) {
      return std::sin(x) * std::exp(-v * v / 4);
    });
    CHECK(project_global(m, odd).max_abs() <= 1e-12);
  }
}

TEST_CASE("equilibrium mass for all statistics") {
  const GridPtr g = build_grid(4, kTwoPi, 64, 8.0);
  CHECK(solve_kappa_inf(1.0, 0, *g).kappa_inf == 1.0);
  const auto md = discrete_maxwellian(*g);
  for (int eps : {1, -1}) {
    const EquilibriumSpec eq = solve_kappa_inf(1.0, eps, *g);
    const double k = eq.kappa_inf;
    double mass = 0;
    for (std::size_t j = 0; j < g->n_v(); ++j) mass += g->w()[j] * k * md[j] / (1 + eps * k * md[j]);
    CHECK(std::abs(mass - 1.0) <= 1e-10);
    // Independent adaptive quadrature of the continuum integral.
    auto f = [&](double v) {
      const double M = std::exp(-v * v / 2) / std::sqrt(kTwoPi);
      return k * M / (1 + eps * k * M);
    };
    const double cont = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -8.0, 8.0, 15, 1e-14);
    CHECK(std::abs(cont - 1.0) <= 1e-8);
    if (eps < 0) CHECK(1.0 - k * *std::max_element(md.begin(), md.end()) > 0.0);
  }
}

TEST_CASE("quadratic remainder identity") {
  const GridPtr g = build_grid(8, kTwoPi, 48, 8.0);
  for (int eps : {1, -1}) {
    Model m(spec(ModelKind::SemiClassical, 1.0, eps, 1.0), g);
    DistributionField h = random_field(g, 21);
    h *= 1e-2 / h.max_abs();
    DistributionField f(g);
    for (std::size_t i = 0; i < g->n_x(); ++i) {
      for (std::size_t j = 0; j < g->n_v(); ++j) f(i, j) = m.f_inf()[j] + m.scaling()[j] * h(i, j);
    }
    DistributionField lhs = apply_Q_nonlinear(m, f);
    for (std::size_t i = 0; i < g->n_x(); ++i) {
      for (std::size_t j = 0; j < g->n_v(); ++j) lhs(i, j) /= m.scaling()[j];
    }
    lhs -= apply_L(m, h);
    const DistributionField gam = gamma_bilinear(m, h, h);
    CHECK(gam.max_abs() > 1e-6);
    CHECK(max_diff(lhs, gam) <= 1e-12);
    CHECK(gamma_bilinear(m, DistributionField(g), h).max_abs() == 0.0);
  }
}

TEST_CASE("nonlinear operator: equilibrium and mass") {
  const GridPtr g = build_grid(8, kTwoPi, 64, 8.0);
  for (const ModelSpec& s : {spec(ModelKind::Relaxation), spec(ModelKind::FokkerPlanck),
                             spec(ModelKind::SemiClassical, 1.0, 1), spec(ModelKind::SemiClassical, 1.0, -1)}) {
    Model m(s, g);
    const DistributionField feq = broadcast(g, m.f_inf());
    CHECK(apply_Q_nonlinear(m, feq).max_abs() <= 1e-10);
    DistributionField f = random_field(g, 31);
    for (std::size_t i = 0; i < g->n_x(); ++i) {
      for (std::size_t j = 0; j < g->n_v(); ++j) f(i, j) = m.f_inf()[j] * (1 + 0.2 * std::tanh(f(i, j)));
    }
    const DistributionField q = apply_Q_nonlinear(m, f);
    for (std::size_t i = 0; i < g->n_x(); ++i) CHECK(std::abs(quad_mass(*g, q.row(i))) <= 1e-12);
  }
}

TEST_CASE("Boltzmann-type collision frequency") {
  const std::vector<double> v = {-3.0, -1.0, 0.0, 0.5, 2.0};
  for (double nu : collision_frequency_boltzmann(0.0, v, 1.7)) CHECK(std::abs(nu - 1.7) <= 1e-8);
  const std::vector<double> zero = {0.0};
  CHECK(std::abs(collision_frequency_boltzmann(1.0, zero, 2.0)[0] - 2.0 * std::sqrt(2.0 / std::numbers::pi)) <= 1e-8);
  std::vector<double> wide;
  for (int i = -20; i <= 20; ++i) wide.push_back(0.5 * i);
  const auto nu = collision_frequency_boltzmann(1.0, wide);
  double lo = 1e300, hi = 0;
  for (std::size_t i = 0; i < wide.size(); ++i) {
    const double r = nu[i] / (1 + std::abs(wide[i]));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo > 0.3);
  CHECK(hi < 1.5);
}

TEST_CASE("model parameters are validated") {
  const GridPtr g = build_grid(4, kTwoPi, 16, 6.0);
  CHECK_THROWS_AS(Model(spec(ModelKind::Relaxation, -1.0), g), std::invalid_argument);
  CHECK_THROWS_AS(Model(spec(ModelKind::SemiClassical, 1.0, 2), g), std::invalid_argument);
  CHECK_THROWS_AS(Model(spec(ModelKind::SemiClassical, 1.0, 1, 0.0), g), std::invalid_argument);
  CHECK_THROWS_AS(model_kind_from_string("vlasov"), std::invalid_argument);
}
