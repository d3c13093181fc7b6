#pragma once

// Twisted Lyapunov functionals, the model Lambda-norms, the H^1 dissipation
// check and exponential-rate fitting.

#include <span>
#include <vector>

#include "hypokin/constants.hpp"
#include "hypokin/lyapunov_weights.hpp"
#include "hypokin/models.hpp"

namespace hypokin {

// Coercivity norm: plain L2 for the relaxation models, (|v h|^2 + |d_v h|^2)^{1/2}
// for Fokker-Planck.
double lambda_norm(const Model& model, const DistributionField& h);

// T h = L h - v d_x h (+ V'(x) d_v h with an external potential).
DistributionField apply_T(const Model& model, const DistributionField& h);

// A|h|^2 + alpha|d_x h|^2 + beta|d_v h|^2 + gamma<d_x h, d_v h>.
double lyapunov_f1(const DistributionField& h, const LyapunovWeights& w);

struct FkSchedule {
  LyapunovWeights q;     // alpha, beta, gamma of every Q_{l,i}
  double nu0_ratio = 1;  // nu0 / nu1
  double k_const = 1;    // dissipation constant K of Q
  double lower = 0;      // c in c |h|^2_{H^k-dot} <= F_k
  double upper = 0;      // C in F_k <= C |h|^2_{H^k-dot}
  // Coefficient of the Q block; the pure v-derivative block has weight one.
  double q_weight(int k) const;
};

FkSchedule fk_schedule(const CoercivityConstants& c, const LyapunovWeights& w);

// Higher-order functional for k in {1, 2}.
double lyapunov_fk(const DistributionField& h, const FkSchedule& s, int k);

// Sum of |d_x^l d_v^j h|^2 over l + j = k.
double homogeneous_seminorm2(const DistributionField& h, int k);

// C_T' = 1 / (4 max(1, c_phi (C_P + 1))).
double dissipation_constant(const CoercivityConstants& c);

struct DissipationResult {
  double lhs = 0;
  double rhs = 0;
  bool pass = false;
};

// The H^1-twisted pairing <T h, h> against -C_T' (|h|_L^2 + |d_x h|_L^2 + |d_v h|_L^2).
// h is projected off the global kernel first; invalid weights are refused.
DissipationResult dissipation_check(const Model& model, const DistributionField& h,
                                    const LyapunovWeights& w, double c_t_prime,
                                    double tolerance = 1e-10);

struct FitOptions {
  double discard = 0.1;  // leading fraction dropped as transient
  double window = 0.5;   // trailing fraction fitted
  double min_r2 = 0.99;
};

struct RateFit {
  double tau = 0;
  double r2 = 0;
  double t_begin = 0;
  double t_end = 0;
  bool conclusive = false;
};

// Least-squares slope of log(values) against time on the trailing window.
// Needs >= 10 samples; throws on non-positive values inside the window.
RateFit fit_rate(std::span<const double> times, std::span<const double> values,
                 const FitOptions& opts = {});

struct DecayReport {
  std::vector<double> times, l2, h1, lyapunov, lambda, mass;
  std::vector<double> lyapunov2;     // order-2 functional, when requested
  std::vector<double> field_energy;  // Poisson runs
  std::vector<double> fmin, fmax;    // nonlinear runs
  RateFit fit;
  int monotone_violations = 0;
  int monotone_violations_f2 = 0;
  int energy_violations = 0;  // Poisson: |h|^2 + |d_x V|^2
  int l2_violations = 0;
};

}  // namespace hypokin
