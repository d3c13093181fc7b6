#pragma once

// Seeded test fields. Random fields are band limited in both variables
// (Fourier modes |k| <= k_max in x, Hermite functions of degree <= n_max in
// v) so that discrete derivatives stay within their resolved range and the
// hypothesis inequalities are probed where the discretisation is faithful.

#include <cstdint>
#include <vector>

#include "hypokin/phase_grid.hpp"

namespace hypokin {

// psi_n(v) = He_n(v) / sqrt(n!) * (2 pi)^{-1/4} e^{-v^2/4}, orthonormal in L2(dv).
std::vector<double> hermite_function(const PhaseGrid& grid, int n);

struct RandomFieldOptions {
  int max_degree = 8;
  int max_mode = -1;  // < 0: n_x / 4
  bool include_mean = true;
};

DistributionField random_field(const GridPtr& grid, std::uint64_t seed,
                               const RandomFieldOptions& opts = {});

}  // namespace hypokin
