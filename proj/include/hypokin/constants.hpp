#pragma once

// Hypothesis constants of the abstract coercivity framework, measured on the
// discrete operators; the weight-selection recipe; spectral gaps.
//
// Every constant is the extremal value of a velocity-only generalized
// symmetric eigenproblem, because all operators act pointwise in x and the
// inequalities integrate over x. Each one is then re-checked on seeded
// random fields; the worst relative margins are kept.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hypokin/lyapunov_weights.hpp"
#include "hypokin/models.hpp"

namespace hypokin {

struct CDeltaEntry {
  double delta = 0.0;
  double value = 0.0;
};

struct CoercivityConstants {
  double nu0 = 0, nu1 = 0, nu2 = 0, nu3 = 0, nu4 = 0, nu5 = 0, nu6 = 0;
  double c_l = 0;
  double lambda_local = 0;
  double c_p = 1;
  // ||phi||_Lambda^2 / ||phi||^2 for the kernel profile phi.
  double c_phi = 1;
  std::vector<CDeltaEntry> c_delta;
  std::map<std::string, double> worst_margin;

  // Smallest admissible delta used when bounding the v-gradient evolution.
  double delta_star() const { return nu0 * nu3 / (4.0 * nu1); }
  // Exact lookup; throws std::out_of_range when delta was not tabulated.
  double c_delta_at(double delta) const;
  void validate() const;
};

// Constants of the v-gradient inequality
//   d/dt |d_v h|^2 <= C1 |h - P h|_Lambda^2 + C2 |d_x h|^2 - nu3 |d_v h|_Lambda^2.
struct GradientConstants {
  double delta_star = 0;
  double c_delta_star = 0;
  double d = 0;  // 2 C(delta*) + 2 nu4
  double c1 = 0;
  double c2 = 0;
};

GradientConstants gradient_constants(const CoercivityConstants& c);

struct MeasureOptions {
  int n_samples = 100;
  std::uint64_t seed = 0x5eed;
  double tolerance = 1e-8;  // relative margin below which certification fails
};

// Throws std::runtime_error if any inequality fails on the samples.
CoercivityConstants measure_constants(const Model& model, const MeasureOptions& opts = {});

struct WeightInputs {
  double lambda = 1, c1 = 1, c2 = 1, c_l = 1, nu3 = 1;
};

// Left-hand sides of the six Step-4 conditions: the first four must be
// <= -1, the last two (gamma^2 - alpha beta, beta - alpha) must be < 0 / <= 0.
std::array<double, 6> weight_conditions(const WeightInputs& in, const LyapunovWeights& w);
bool weights_satisfy(const WeightInputs& in, const LyapunovWeights& w);

// beta = 2/nu3; every later weight is its minimal admissible value times margin.
LyapunovWeights select_weights(const WeightInputs& in, double margin = 2.0);
LyapunovWeights select_weights(const CoercivityConstants& c, double margin = 2.0);
WeightInputs weight_inputs(const CoercivityConstants& c);

double gap_bgk(double kappa);
double lambda_from_local(const CoercivityConstants& c);

struct FermionGapBound {
  double coercivity = 0;  // 1 - int f^3 / rho
  double nu_bar = 0;      // sup nu
  double l2_bound = 0;    // rho coercivity / (kappa kappa_inf), the L2 gap bound
  double bound = 0;       // l2_bound / nu_bar, the gap bound in the Lambda metric
};
FermionGapBound gap_bound_fermion(double rho, double kappa, const EquilibriumSpec& eq,
                                  const PhaseGrid& grid);
FermionGapBound gap_bound_fermion(const Model& model);

enum class GapMetric { L2, Lambda };

// Smallest eigenvalue of -L on the weighted complement of its kernel,
// measured against the chosen metric.
double numeric_gap(const Model& model, GapMetric metric = GapMetric::L2);

// Sharp constant c in int |d_v h + v h / 2|^2 >= c |h|^2 for h orthogonal to M.
double fp_dirichlet_constant(const Model& model);

// max Re spec(T) over the resolved Fourier modes, kernel removed.
double numeric_abscissa(const Model& model);
// Same for an arbitrary velocity matrix L with a kernel of dimension kernel_dim
// in the k = 0 block; used for pure transport and for cross-checks.
double numeric_abscissa(const Eigen::MatrixXd& L, const PhaseGrid& grid, int kernel_dim);

}  // namespace hypokin
