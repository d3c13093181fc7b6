#include "hypokin/hypocoercivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypokin {
namespace {

DistributionField times_v(const DistributionField& h) {
  DistributionField out = h;
  const auto v = h.grid().v();
  for (std::size_t i = 0; i < h.grid().n_x(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) r[j] *= v[j];
  }
  return out;
}

double lambda_norm2(const Model& model, const DistributionField& h) {
  return velocity_form(model.lambda_gram(), h, h);
}

}  // namespace

double lambda_norm(const Model& model, const DistributionField& h) {
  return std::sqrt(std::max(0.0, lambda_norm2(model, h)));
}

DistributionField apply_T(const Model& model, const DistributionField& h) {
  DistributionField out = apply_L(model, h);
  out -= times_v(grad_x(h));
  const std::vector<double> dV = potential_gradient(model);
  if (!dV.empty()) {
    const DistributionField dh = apply_velocity_matrix(RowMatrix(model.grid().dv_skew()), h);
    for (std::size_t i = 0; i < h.grid().n_x(); ++i) {
      auto o = out.row(i);
      const auto d = dh.row(i);
      for (std::size_t j = 0; j < o.size(); ++j) o[j] += dV[i] * d[j];
    }
  }
  return out;
}

double lyapunov_f1(const DistributionField& h, const LyapunovWeights& w) {
  const DistributionField dx = grad_x(h);
  const DistributionField dv = grad_v(h);
  return w.a * inner_l2(h, h) + w.alpha * inner_l2(dx, dx) + w.beta * inner_l2(dv, dv) +
         w.gamma_mix * inner_l2(dx, dv);
}

double FkSchedule::q_weight(int k) const {
  return (2.0 / k_const) * std::pow(nu0_ratio / 2.0, -2.0 * (k - 1));
}

FkSchedule fk_schedule(const CoercivityConstants& c, const LyapunovWeights& w) {
  w.validate();
  FkSchedule s;
  s.q = w;
  s.nu0_ratio = c.nu0 / c.nu1;
  s.k_const = 1.0 / (2.0 * std::max(1.0, c.c_phi));
  // Each Q sits between (beta/2) and (3 alpha/2) times its two squared norms.
  const double qw = s.q_weight(2);
  s.lower = std::min(1.0, qw * w.beta / 2.0);
  s.upper = std::max(1.0, qw * 3.0 * w.alpha / 2.0);
  return s;
}

double lyapunov_fk(const DistributionField& h, const FkSchedule& s, int k) {
  if (k == 1) {
    LyapunovWeights q = s.q;
    q.a = 0.0;
    return s.q_weight(1) * lyapunov_f1(h, q);
  }
  if (k != 2) throw std::invalid_argument("lyapunov_fk supports k = 1 and k = 2 only");
  const DistributionField hx = grad_x(h);
  const DistributionField hxx = grad_x(hx);
  const DistributionField hxv = grad_v(hx);
  const DistributionField hvv = grad_v(grad_v(h));
  const double q = s.q.alpha * inner_l2(hxx, hxx) + s.q.beta * inner_l2(hxv, hxv) +
                   s.q.gamma_mix * inner_l2(hxv, hxx);
  return inner_l2(hvv, hvv) + s.q_weight(2) * q;
}

double homogeneous_seminorm2(const DistributionField& h, int k) {
  if (k < 0) throw std::invalid_argument("seminorm order must be >= 0");
  // Derivatives of every mixed order l + j = k.
  double s = 0.0;
  for (int l = 0; l <= k; ++l) {
    DistributionField d = h;
    for (int a = 0; a < l; ++a) d = grad_x(d);
    for (int b = 0; b < k - l; ++b) d = grad_v(d);
    s += inner_l2(d, d);
  }
  return s;
}

double dissipation_constant(const CoercivityConstants& c) {
  return 1.0 / (4.0 * std::max(1.0, c.c_phi * (c.c_p + 1.0)));
}

DissipationResult dissipation_check(const Model& model, const DistributionField& h_in,
                                    const LyapunovWeights& w, double c_t_prime, double tolerance) {
  w.validate();
  const DistributionField h = h_in - project_global(model, h_in);
  const DistributionField th = apply_T(model, h);
  const DistributionField hx = grad_x(h), hv = grad_v(h);
  const DistributionField tx = grad_x(th), tv = grad_v(th);

  DissipationResult r;
  r.lhs = w.a * inner_l2(th, h) + w.alpha * inner_l2(tx, hx) + w.beta * inner_l2(tv, hv) +
          0.5 * w.gamma_mix * (inner_l2(tx, hv) + inner_l2(hx, tv));
  const double bracket = lambda_norm2(model, h) + lambda_norm2(model, hx) + lambda_norm2(model, hv);
  r.rhs = -c_t_prime * bracket;
  const double scale = std::max(std::abs(r.lhs), std::abs(r.rhs));
  r.pass = r.lhs <= r.rhs + tolerance * scale;
  return r;
}

RateFit fit_rate(std::span<const double> times, std::span<const double> values,
                 const FitOptions& opts) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_rate: length mismatch");
  const std::size_t n = times.size();
  if (n < 10) throw std::invalid_argument("fit_rate needs at least 10 samples");
  if (!(opts.discard >= 0.0 && opts.window > 0.0 && opts.discard + opts.window <= 1.0 + 1e-12)) {
    throw std::invalid_argument("fit_rate: invalid window fractions");
  }
  const auto first_kept = static_cast<std::size_t>(std::floor(opts.discard * static_cast<double>(n)));
  auto begin = n - std::max<std::size_t>(2, static_cast<std::size_t>(
                                                std::ceil(opts.window * static_cast<double>(n))));
  begin = std::max(begin, first_kept);
  const std::size_t m = n - begin;

  double st = 0, sy = 0;
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = values[begin + i];
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::domain_error("fit_rate: non-positive sample in the fit window");
    }
    y[i] = std::log(v);
    st += times[begin + i];
    sy += y[i];
  }
  const double tm = st / static_cast<double>(m), ym = sy / static_cast<double>(m);
  double stt = 0, sty = 0, syy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = times[begin + i] - tm, dy = y[i] - ym;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  RateFit f;
  const double slope = sty / stt;
  f.tau = -slope;
  double ss_res = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - (ym + slope * (times[begin + i] - tm));
    ss_res += e * e;
  }
  // A flat series is fitted perfectly by a zero slope.
  f.r2 = syy > 1e-24 * static_cast<double>(m) ? 1.0 - ss_res / syy : 1.0;
  f.t_begin = times[begin];
  f.t_end = times[n - 1];
  f.conclusive = f.r2 >= opts.min_r2;
  return f;
}

}  // namespace hypokin
