#pragma once

// Time integration: exact Fourier transport composed (Strang) with an exact
// exponential collision step, plus the external-potential, Poisson and
// nonlinear semi-classical variants.

#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "hypokin/constants.hpp"
#include "hypokin/hypocoercivity.hpp"
#include "hypokin/models.hpp"

namespace hypokin {

enum class Scheme { StrangExact, ImexEuler };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

enum class InitialKind {
  ModeVM,       // sin(k x) v M(v)
  ModeKernel,   // sin(k x) phi(v), phi the kernel profile
  KernelConst,  // phi(v), constant in x
  Random,       // band-limited random field
  Zero
};
std::string to_string(InitialKind k);
InitialKind initial_kind_from_string(const std::string& s);

struct InitialCondition {
  InitialKind kind = InitialKind::ModeVM;
  double amplitude = 1.0;
  int mode = 1;
  // Scale so the L2 norm of the perturbation equals the amplitude.
  bool normalise = false;
};

struct Tolerances {
  double monotone = 1e-9;     // relative per-step increase allowed for F_1 / L2 / energy
  double monotone_f2 = 1e-8;  // same for F_2
  double mass = 1e-10;        // relative mass drift (nonlinear runs)
  double range = 1e-12;       // slack on 0 <= f <= 1 for fermions
};

struct RunConfig {
  ModelSpec model;
  std::size_t n_x = 16;
  double length_x = 2.0 * std::numbers::pi;
  std::size_t n_v = 32;
  double v_max = 8.0;
  Quadrature quadrature = Quadrature::Uniform;

  double t_end = 20.0;
  double dt = 1e-3;
  int sample_every = 100;
  Scheme scheme = Scheme::StrangExact;
  InitialCondition initial;
  std::uint64_t seed = 1;

  bool linear = true;             // semi-classical: false evolves the full equation
  bool transport_only = false;    // drop the collision step (diagnostics)
  bool project_initial = true;    // remove the global-kernel component of h0
  int order = 1;                  // 2 also tracks the order-2 functional
  int measure_samples = 100;      // random fields certifying the constants
  double weight_margin = 2.0;     // factor over the minimal admissible weights
  double potential_bound = 0.05;  // smallness required of the potential (c2_bound)
  double amplitude_bound = 0.1;   // nonlinear runs: H1 size of the initial perturbation
  Tolerances tol;
  FitOptions fit;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  GridPtr make_grid() const;
};

DistributionField make_initial(const Model& model, const InitialCondition& ic, std::uint64_t seed);

// Exact free flow h(x, v) -> h(x - v dt, v); the Nyquist mode is dropped.
DistributionField transport_step(const DistributionField& h, double dt);

// Per-step velocity propagator for the linear collision operator: the exact
// semigroup with the kernel component restored exactly (StrangExact), or a
// backward Euler step (ImexEuler).
class LinearPropagator {
 public:
  LinearPropagator(const Model& model, double dt, Scheme scheme);
  DistributionField apply(const DistributionField& h) const;
  const RowMatrix& matrix() const { return p_; }

 private:
  RowMatrix p_;
};

// Exact collision semigroup exp(dt L) with kernel deflation.
DistributionField collision_step(const Model& model, const DistributionField& h, double dt);

struct PoissonField {
  std::vector<double> potential;  // V
  std::vector<double> gradient;   // dV/dx
  double energy = 0;              // |dV/dx|^2 over the torus
};

// Solves V'' = source with zero-mean gauge; throws std::runtime_error when the
// source has a nonzero mean beyond round-off.
PoissonField solve_poisson(const PhaseGrid& grid, std::span<const double> source);

struct RunResult {
  DecayReport report;
  CoercivityConstants constants;
  LyapunovWeights weights;
  EquilibriumSpec equilibrium;
  double mass_drift = 0;  // relative change of the conserved moment
  double h4_constant = 0;  // nonlinear: max |Gamma(h,h)| / (|h| |h|_Lambda) seen
};

RunResult run_linear(const RunConfig& config);
RunResult run_nonlinear_sc(const RunConfig& config);
RunResult run_with_potential(const RunConfig& config);
RunResult run_poisson(const RunConfig& config);
// Dispatches on the model spec and the linear flag.
RunResult run(const RunConfig& config);

}  // namespace hypokin
