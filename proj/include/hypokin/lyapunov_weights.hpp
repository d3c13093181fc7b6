#pragma once

#include <stdexcept>

namespace hypokin {

// Weights of F(h) = A|h|^2 + alpha|d_x h|^2 + beta|d_v h|^2 + gamma<d_x h, d_v h>.
struct LyapunovWeights {
  double a = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma_mix = 0.0;
  double eta = 1.0;
  int order = 1;

  bool positive_definite() const {
    return a > 0.0 && alpha > 0.0 && beta > 0.0 && gamma_mix * gamma_mix < alpha * beta;
  }

  // Throws std::invalid_argument unless all weights are positive,
  // gamma^2 < alpha beta and alpha >= beta.
  void validate() const {
    if (!(a > 0.0 && alpha > 0.0 && beta > 0.0 && gamma_mix > 0.0 && eta > 0.0)) {
      throw std::invalid_argument("Lyapunov weights must be strictly positive");
    }
    if (!(gamma_mix * gamma_mix < alpha * beta)) {
      throw std::invalid_argument("Lyapunov weights violate gamma^2 < alpha*beta");
    }
    if (!(alpha >= beta)) throw std::invalid_argument("Lyapunov weights violate alpha >= beta");
    if (order < 1 || order > 2) throw std::invalid_argument("Lyapunov order must be 1 or 2");
  }
};

}  // namespace hypokin
