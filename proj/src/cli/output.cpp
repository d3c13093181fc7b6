#include <cstdio>
#include <sstream>

#include "hypokin/cli.hpp"

namespace hypokin::cli {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string series_csv(const DecayReport& r) {
  const bool field = !r.field_energy.empty();
  const bool range = !r.fmin.empty();
  std::ostringstream out;
  out << "t,l2,h1,lyapunov,lambda,mass";
  if (field) out << ",field_energy";
  if (range) out << ",fmin,fmax";
  out << '\n';
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out << format_double(r.times[i]) << ',' << format_double(r.l2[i]) << ','
        << format_double(r.h1[i]) << ',' << format_double(r.lyapunov[i]) << ','
        << format_double(r.lambda[i]) << ',' << format_double(r.mass[i]);
    if (field) out << ',' << format_double(r.field_energy[i]);
    if (range) out << ',' << format_double(r.fmin[i]) << ',' << format_double(r.fmax[i]);
    out << '\n';
  }
  return out.str();
}

json constants_json(const CoercivityConstants& c) {
  json cd = json::array();
  for (const auto& e : c.c_delta) cd.push_back({{"delta", e.delta}, {"value", e.value}});
  return {{"nu0", c.nu0},
          {"nu1", c.nu1},
          {"nu2", c.nu2},
          {"nu3", c.nu3},
          {"nu4", c.nu4},
          {"nu5", c.nu5},
          {"nu6", c.nu6},
          {"c_l", c.c_l},
          {"lambda_local", c.lambda_local},
          {"c_p", c.c_p},
          {"c_phi", c.c_phi},
          {"c_delta", cd},
          {"worst_margin", c.worst_margin}};
}

json weights_json(const LyapunovWeights& w) {
  return {{"a", w.a},
          {"alpha", w.alpha},
          {"beta", w.beta},
          {"gamma", w.gamma_mix},
          {"eta", w.eta},
          {"order", w.order}};
}

json manifest_json(const json& config, const RunResult& r, double wall_seconds) {
  const DecayReport& rep = r.report;
  json files = json::array({"series.csv"});
  if (!rep.lyapunov2.empty()) files.push_back("series_fk.csv");
  return {{"tool", "hypokin"},
          {"version", kVersion},
          {"config", config},
          {"seed", config.at("seed")},
          {"equilibrium",
           {{"kind", to_string(r.equilibrium.kind)},
            {"kappa_inf", r.equilibrium.kappa_inf},
            {"rho_inf", r.equilibrium.rho_inf}}},
          {"constants", constants_json(r.constants)},
          {"weights", weights_json(r.weights)},
          {"tau_fit", rep.fit.tau},
          {"fit",
           {{"tau", rep.fit.tau},
            {"r2", rep.fit.r2},
            {"t_begin", rep.fit.t_begin},
            {"t_end", rep.fit.t_end},
            {"conclusive", rep.fit.conclusive}}},
          {"monotone_violations", rep.monotone_violations},
          {"monotone_violations_f2", rep.monotone_violations_f2},
          {"energy_violations", rep.energy_violations},
          {"l2_violations", rep.l2_violations},
          {"mass_drift", r.mass_drift},
          {"h4_constant", r.h4_constant},
          {"samples", rep.times.size()},
          {"files", files},
          {"wall_seconds", wall_seconds}};
}

}  // namespace hypokin::cli
