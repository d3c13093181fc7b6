#include "hypokin/sampling.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace hypokin {

std::vector<double> hermite_function(const PhaseGrid& grid, int n) {
  const auto v = grid.v();
  std::vector<double> out(v.size());
  const double c = std::pow(2.0 * std::numbers::pi, -0.25);
  for (std::size_t j = 0; j < v.size(); ++j) {
    // Normalised three-term recurrence: p_k = (v p_{k-1} - sqrt(k-1) p_{k-2}) / sqrt(k).
    double pm = 0.0, p = 1.0;
    for (int k = 1; k <= n; ++k) {
      const double next = (v[j] * p - std::sqrt(static_cast<double>(k - 1)) * pm) /
                          std::sqrt(static_cast<double>(k));
      pm = p;
      p = next;
    }
    out[j] = c * p * std::exp(-0.25 * v[j] * v[j]);
  }
  return out;
}

DistributionField random_field(const GridPtr& grid, std::uint64_t seed,
                               const RandomFieldOptions& opts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int kmax = opts.max_mode < 0 ? static_cast<int>(grid->n_x() / 4) : opts.max_mode;
  std::vector<std::vector<double>> psi;
  for (int n = 0; n <= opts.max_degree; ++n) psi.push_back(hermite_function(*grid, n));

  DistributionField h(grid);
  const double k1 = grid->wavenumber(1);
  for (int k = opts.include_mean ? 0 : 1; k <= kmax; ++k) {
    for (int n = 0; n <= opts.max_degree; ++n) {
      const double a = normal(rng);
      const double b = k == 0 ? 0.0 : normal(rng);
      for (std::size_t i = 0; i < grid->n_x(); ++i) {
        const double x = grid->x(i);
        const double cx = a * std::cos(k * k1 * x) + b * std::sin(k * k1 * x);
        auto r = h.row(i);
        for (std::size_t j = 0; j < grid->n_v(); ++j) r[j] += cx * psi[n][j];
      }
    }
  }
  return h;
}

}  // namespace hypokin
