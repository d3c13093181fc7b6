#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <thread>

#include "hypokin/cli.hpp"

namespace hypokin::cli {
namespace {

using nlohmann::json;

json load_config(const std::filesystem::path& path, const Options& opts) {
  json cfg = normalised_config(read_json(path));
  if (opts.seed) cfg["seed"] = *opts.seed;
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs one simulation from a normalised config and writes its files into dir.
RunResult simulate_into(const json& cfg, const std::filesystem::path& dir) {
  const RunConfig rc = parse_run_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = run(rc);
  const double wall = seconds_since(t0);
  write_text(dir / "series.csv", series_csv(r.report));
  if (!r.report.lyapunov2.empty()) {
    std::ostringstream fk;
    fk << "t,lyapunov_fk\n";
    for (std::size_t i = 0; i < r.report.times.size(); ++i) {
      fk << format_double(r.report.times[i]) << ',' << format_double(r.report.lyapunov2[i]) << '\n';
    }
    write_text(dir / "series_fk.csv", fk.str());
  }
  json manifest = manifest_json(cfg, r, wall);
  manifest["command"] = "simulate";
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return r;
}

std::string model_label(const ModelSpec& s) {
  std::ostringstream o;
  o << to_string(s.kind) << "(kappa=" << s.kappa;
  if (s.kind == ModelKind::SemiClassical) o << ", eps=" << s.epsilon << ", rho=" << s.rho;
  o << ")";
  return o.str();
}

json nullable(std::optional<double> x) { return x ? json(*x) : json(nullptr); }

std::string num_or_dash(std::optional<double> x) {
  if (!x) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10f", *x);
  return buf;
}

json gap_row(const ModelSpec& spec, const GridPtr& grid) {
  Model m(spec, grid);
  std::optional<double> bound;
  double numeric = 0;
  json row = {{"model", model_label(spec)},
              {"kind", to_string(spec.kind)},
              {"kappa", spec.kappa},
              {"epsilon", spec.epsilon},
              {"rho", spec.rho}};
  const bool relaxation_like =
      spec.kind == ModelKind::Relaxation || (spec.kind == ModelKind::SemiClassical && spec.epsilon == 0);
  if (relaxation_like) {
    bound = gap_bgk(spec.kappa);
    numeric = numeric_gap(m);
    row["metric"] = "l2";
  } else if (spec.kind == ModelKind::FokkerPlanck) {
    bound = 1.0;
    numeric = numeric_gap(m);
    row["metric"] = "l2";
    row["bound_source"] = "hermite_spectrum";
    row["dirichlet_constant"] = fp_dirichlet_constant(m);
    row["dirichlet_constant_stated"] = 2.0;
  } else if (spec.epsilon == 1) {
    const FermionGapBound b = gap_bound_fermion(m);
    bound = b.bound;
    numeric = numeric_gap(m, GapMetric::Lambda);
    row["metric"] = "lambda";
    row["coercivity"] = b.coercivity;
    row["nu_bar"] = b.nu_bar;
    row["l2_bound"] = b.l2_bound;
    row["numeric_l2"] = numeric_gap(m);
  } else {
    numeric = numeric_gap(m, GapMetric::Lambda);
    row["metric"] = "lambda";
  }
  row["bound"] = nullable(bound);
  row["numeric"] = numeric;
  row["margin"] = bound ? json(numeric - *bound) : json(nullptr);
  row["kappa_inf"] = m.equilibrium().kappa_inf;
  const PhaseGrid& g = m.grid();
  if (!spec.potential && !spec.poisson && g.n_x() * g.n_v() <= 8192) {
    row["abscissa"] = numeric_abscissa(m);
  }
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

struct SweepPoint {
  std::vector<json> values;
  std::string status = "pending";
  std::string message;
  std::optional<RunResult> result;
};

}  // namespace

int cmd_simulate(const std::filesystem::path& config_path, const Options& opts) {
  const json cfg = load_config(config_path, opts);
  const std::filesystem::path dir = output_dir(cfg, opts);
  const RunResult r = simulate_into(cfg, dir);
  const RateFit& f = r.report.fit;
  std::printf("tau=%.10g r2=%.6f conclusive=%s F1 violations=%d mass drift=%.3e", f.tau, f.r2,
              f.conclusive ? "yes" : "no", r.report.monotone_violations, r.mass_drift);
  if (!r.report.field_energy.empty()) std::printf(" energy violations=%d", r.report.energy_violations);
  if (!r.report.lyapunov2.empty()) std::printf(" F2 violations=%d", r.report.monotone_violations_f2);
  std::printf("\n");
  std::printf("wrote %s\n", (dir / "manifest.json").string().c_str());
  return kOk;
}

int cmd_gap(const std::filesystem::path& config_path, const Options& opts) {
  const json cfg = load_config(config_path, opts);
  const RunConfig rc = parse_run_config(cfg);
  const GridPtr grid = rc.make_grid();
  const std::vector<ModelSpec> models = parse_gap_models(cfg, *grid);
  json rows = json::array();
  std::printf("%-40s %16s %16s %16s\n", "model", "bound", "numeric", "margin");
  for (const ModelSpec& s : models) {
    json row = gap_row(s, grid);
    auto opt = [&](const char* k) {
      return row[k].is_null() ? std::nullopt : std::optional<double>(row[k].get<double>());
    };
    std::printf("%-40s %16s %16s %16s\n", row["model"].get<std::string>().c_str(),
                num_or_dash(opt("bound")).c_str(), num_or_dash(opt("numeric")).c_str(),
                num_or_dash(opt("margin")).c_str());
    if (row.contains("dirichlet_constant")) {
      std::printf("%-40s dirichlet-form constant %.10f (stated %.1f)\n", "",
                  row["dirichlet_constant"].get<double>(), 2.0);
    }
    rows.push_back(std::move(row));
  }
  const std::filesystem::path dir = output_dir(cfg, opts);
  const json doc = {{"tool", "hypokin"},
                    {"version", kVersion},
                    {"command", "gap"},
                    {"grid", {{"n_x", rc.n_x}, {"n_v", rc.n_v}, {"v_max", rc.v_max}}},
                    {"models", rows}};
  write_text(dir / "gaps.json", doc.dump(2) + "\n");
  return kOk;
}

int cmd_weights(const std::filesystem::path& config_path, const Options& opts) {
  const json cfg = load_config(config_path, opts);
  const double margin = parse_weight_margin(cfg);
  json doc = {{"tool", "hypokin"}, {"version", kVersion}, {"command", "weights"}, {"margin", margin}};
  WeightInputs in;
  if (auto given = parse_weight_inputs(cfg)) {
    in = *given;
    doc["source"] = "inputs";
  } else {
    const RunConfig rc = parse_run_config(cfg);
    Model m(rc.model, rc.make_grid());
    MeasureOptions mo;
    mo.seed = rc.seed ^ 0x5eedULL;
    mo.n_samples = rc.measure_samples;
    const CoercivityConstants c = measure_constants(m, mo);
    in = weight_inputs(c);
    doc["source"] = "measured";
    doc["constants"] = constants_json(c);
  }
  const LyapunovWeights w = select_weights(in, margin);
  const auto cond = weight_conditions(in, w);
  const bool ok = weights_satisfy(in, w);
  doc["inputs"] = {{"lambda", in.lambda}, {"c1", in.c1}, {"c2", in.c2}, {"c_l", in.c_l}, {"nu3", in.nu3}};
  doc["weights"] = weights_json(w);
  doc["conditions"] = json(std::vector<double>(cond.begin(), cond.end()));
  doc["satisfied"] = ok;

  std::printf("A     = %.17g\nalpha = %.17g\nbeta  = %.17g\ngamma = %.17g\neta   = %.17g\n", w.a,
              w.alpha, w.beta, w.gamma_mix, w.eta);
  static const char* names[6] = {"beta*C1 - 2*A*lambda",  "C2*beta - gamma",
                                 "gamma*C_L/eta - beta*nu3", "eta*gamma*C_L - 2*alpha*lambda",
                                 "gamma^2 - alpha*beta",  "beta - alpha"};
  for (int i = 0; i < 6; ++i) std::printf("  %-32s %.17g\n", names[i], cond[i]);
  std::printf("all conditions %s\n", ok ? "satisfied" : "VIOLATED");

  write_text(output_dir(cfg, opts) / "weights.json", doc.dump(2) + "\n");
  return ok ? kOk : kRuntimeError;
}

int cmd_sweep(const std::filesystem::path& config_path, const Options& opts) {
  const json cfg = load_config(config_path, opts);
  const json& grid = cfg.at("sweep");
  if (!grid.is_object() || grid.empty()) {
    throw ConfigError("field 'sweep' must map dotted config keys to non-empty arrays");
  }
  std::vector<std::string> keys;
  std::vector<std::vector<json>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw ConfigError("field 'sweep." + key + "' must be a non-empty array");
    }
    keys.push_back(key);
    axes.emplace_back(values.begin(), values.end());
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();

  std::vector<SweepPoint> points(total);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rem = p;
    points[p].values.resize(keys.size());
    for (std::size_t k = keys.size(); k-- > 0;) {
      points[p].values[k] = axes[k][rem % axes[k].size()];
      rem /= axes[k].size();
    }
  }

  const std::filesystem::path root = output_dir(cfg, opts);
  json base = cfg;
  base["sweep"] = nullptr;
  base["output"]["dir"] = nullptr;

  auto work = [&](std::size_t p) {
    SweepPoint& pt = points[p];
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", p);
    try {
      json c = base;
      for (std::size_t k = 0; k < keys.size(); ++k) {
        std::string ptr = "/" + keys[k];
        std::replace(ptr.begin(), ptr.end(), '.', '/');
        c[json::json_pointer(ptr)] = pt.values[k];
      }
      c = normalised_config(c);
      pt.result = simulate_into(c, root / name);
      pt.status = "ok";
    } catch (const std::invalid_argument& e) {
      pt.status = "invalid";
      pt.message = e.what();
    } catch (const json::exception& e) {
      pt.status = "invalid";
      pt.message = e.what();
    } catch (const std::exception& e) {
      pt.status = "failed";
      pt.message = e.what();
    }
  };

  unsigned jobs = opts.jobs ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, total));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t p; (p = next.fetch_add(1)) < total;) work(p);
    });
  }
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "point";
  for (const auto& k : keys) csv << ',' << csv_field(k);
  csv << ",status,tau,r2,conclusive,monotone_violations,mass_drift,message\n";
  int failed = 0;
  for (std::size_t p = 0; p < total; ++p) {
    const SweepPoint& pt = points[p];
    csv << p;
    for (const auto& v : pt.values) csv << ',' << csv_field(v.dump());
    csv << ',' << pt.status;
    if (pt.result) {
      const RateFit& f = pt.result->report.fit;
      csv << ',' << format_double(f.tau) << ',' << format_double(f.r2) << ','
          << (f.conclusive ? "true" : "false") << ',' << pt.result->report.monotone_violations << ','
          << format_double(pt.result->mass_drift);
    } else {
      ++failed;
      csv << ",,,,,";
    }
    csv << ',' << csv_field(pt.message) << '\n';
  }
  write_text(root / "sweep_summary.csv", csv.str());
  std::printf("%zu points, %d failed; wrote %s\n", total, failed,
              (root / "sweep_summary.csv").string().c_str());
  return kOk;
}

int guarded(const std::string& command, const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "hypokin " << command << ": I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "hypokin " << command << ": invalid config: " << e.what() << '\n';
    return kSchemaError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "hypokin " << command << ": invalid config: " << e.what() << '\n';
    return kSchemaError;
  } catch (const std::exception& e) {
    std::cerr << "hypokin " << command << ": run aborted: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace hypokin::cli
