#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "hypokin/hypocoercivity.hpp"
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

double n2(const DistributionField& h) { return inner_l2(h, h); }
}  // namespace

TEST_CASE("relaxation coercivity norm is the L2 norm") {
  const GridPtr g = build_grid(8, kTwoPi, 32, 8.0);
  Model m(spec(ModelKind::Relaxation, 2.0), g);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const DistributionField h = random_field(g, s);
    CHECK(lambda_norm(m, h) == doctest::Approx(norm_l2(h)).epsilon(1e-14));
  }
}

TEST_CASE("Fokker-Planck coercivity norm") {
  const GridPtr g = build_grid(4, kTwoPi, 256, 10.0);
  Model m(spec(ModelKind::FokkerPlanck), g);
  const auto M = DistributionField::from_function(
      g, [](double, double v) { return std::exp(-v * v / 4) / std::pow(kTwoPi, 0.25); });
  // int v^2 M^2 = 1 and int |d_v M|^2 = 1/4 per unit length in x.
  CHECK(std::abs(lambda_norm(m, M) - std::sqrt(kTwoPi * 1.25)) <= 1e-6);

  const GridPtr gc = build_grid(8, kTwoPi, 64, 8.0);
  Model mc(spec(ModelKind::FokkerPlanck), gc);
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const DistributionField h = random_field(gc, s);
    const double l = lambda_norm(mc, h);
    CHECK(l * l >= n2(h) * (1 - 1e-10));
  }
}

TEST_CASE("first-order functional") {
  const GridPtr g = build_grid(8, kTwoPi, 32, 8.0);
  const LyapunovWeights w{1.5, 5.0, 2.0, 3.0, 3.0, 1};
  CHECK(lyapunov_f1(DistributionField(g), w) == 0.0);
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const DistributionField h = random_field(g, s);
    const double hx = n2(grad_x(h)), hv = n2(grad_v(h)), h0 = n2(h);
    LyapunovWeights w0 = w;
    w0.gamma_mix = 0;
    CHECK(lyapunov_f1(h, w0) == doctest::Approx(w.a * h0 + w.alpha * hx + w.beta * hv).epsilon(1e-13));
    const double f = lyapunov_f1(h, w);
    CHECK(w.a * h0 + 0.5 * w.beta * (hx + hv) <= f * (1 + 1e-12));
    CHECK(f <= (w.a * h0 + 1.5 * w.alpha * (hx + hv)) * (1 + 1e-12));
  }
}

TEST_CASE("higher-order functional") {
  const GridPtr g = build_grid(8, kTwoPi, 32, 8.0);
  Model m(spec(ModelKind::Relaxation), g);
  const CoercivityConstants c = measure_constants(m);
  const LyapunovWeights w = select_weights(c);
  const FkSchedule s = fk_schedule(c, w);
  CHECK(lyapunov_fk(DistributionField(g), s, 2) == 0.0);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const DistributionField h = random_field(g, seed);
    LyapunovWeights q = s.q;
    q.a = 0;
    CHECK(lyapunov_fk(h, s, 1) == doctest::Approx(s.q_weight(1) * lyapunov_f1(h, q)).epsilon(1e-14));
    const double f2 = lyapunov_fk(h, s, 2);
    const double hn = homogeneous_seminorm2(h, 2);
    CHECK(s.lower * hn <= f2 * (1 + 1e-12));
    CHECK(f2 <= s.upper * hn * (1 + 1e-12));
  }
  CHECK_THROWS_AS(lyapunov_fk(DistributionField(g), s, 3), std::invalid_argument);
}

TEST_CASE("H1 dissipation inequality on random fields") {
  const GridPtr g = build_grid(8, kTwoPi, 32, 8.0);
  for (const ModelSpec& sp : {spec(ModelKind::Relaxation), spec(ModelKind::FokkerPlanck),
                              spec(ModelKind::SemiClassical, 1.0, 1), spec(ModelKind::SemiClassical, 1.0, -1)}) {
    Model m(sp, g);
    const CoercivityConstants c = measure_constants(m);
    const LyapunovWeights w = select_weights(c);
    const double ct = dissipation_constant(c);
    int passed = 0;
    for (std::uint64_t s = 0; s < 500; ++s) {
      RandomFieldOptions o;
      o.include_mean = s % 2 == 0;
      if (dissipation_check(m, random_field(g, 100 + s, o), w, ct).pass) ++passed;
    }
    CHECK_MESSAGE(passed == 500, to_string(sp.kind), " eps=", sp.epsilon);

    DistributionField k(g);
    for (std::size_t i = 0; i < g->n_x(); ++i) {
      for (std::size_t j = 0; j < g->n_v(); ++j) k(i, j) = m.kernel()[j];
    }
    CHECK(dissipation_check(m, k, w, ct).lhs <= 1e-12);
  }
}

TEST_CASE("dissipation check refuses an indefinite functional") {
  const GridPtr g = build_grid(8, kTwoPi, 16, 6.0);
  Model m(spec(ModelKind::Relaxation), g);
  const LyapunovWeights bad{1.0, 2.0, 1.0, 2.0, 1.0, 1};
  CHECK_THROWS_AS(dissipation_check(m, random_field(g, 1), bad, 0.1), std::invalid_argument);
}

TEST_CASE("exponential rate fit") {
  std::vector<double> t(101), y(101), noisy(101), flat(101, 3.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1e-8);
  for (int i = 0; i <= 100; ++i) {
    t[i] = 0.1 * i;
    y[i] = std::exp(-2.0 * t[i]);
    noisy[i] = std::exp(-t[i]) + n(rng);
  }
  const RateFit a = fit_rate(t, y);
  CHECK(std::abs(a.tau - 2.0) <= 1e-10);
  CHECK(a.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.conclusive);
  CHECK(std::abs(fit_rate(t, noisy).tau - 1.0) <= 1e-3);
  CHECK(std::abs(fit_rate(t, flat).tau) <= 1e-12);

  std::vector<double> few(5, 1.0);
  CHECK_THROWS_AS(fit_rate(std::span(t).first(5), few), std::invalid_argument);
  y[90] = 0.0;
  CHECK_THROWS_AS(fit_rate(t, y), std::domain_error);
}
