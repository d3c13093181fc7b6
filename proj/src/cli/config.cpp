#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hypokin/cli.hpp"

namespace hypokin::cli {
namespace {

using nlohmann::json;

// Every accepted key with its default. A null default accepts a value whose
// shape is checked by the typed readers below.
const json& defaults() {
  static const json d = {
      {"model",
       {{"kind", "relaxation"},
        {"kappa", 1.0},
        {"epsilon", 0},
        {"rho", 1.0},
        {"poisson", false},
        {"potential", nullptr}}},
      {"grid",
       {{"n_x", 16},
        {"length_x", 2.0 * std::numbers::pi},
        {"n_v", 32},
        {"v_max", 8.0},
        {"quadrature", "uniform"}}},
      {"time",
       {{"t_end", 20.0}, {"dt", 1e-3}, {"sample_every", 100}, {"scheme", "strang_exact_transport"}}},
      {"initial", {{"kind", "mode_vm"}, {"amplitude", 1.0}, {"mode", 1}, {"normalise", false}}},
      {"seed", 1},
      {"linear", true},
      {"transport_only", false},
      {"project_initial", true},
      {"order", 1},
      {"bounds", {{"potential", 0.05}, {"amplitude", 0.1}}},
      {"tolerances", {{"monotone", 1e-9}, {"monotone_f2", 1e-8}, {"mass", 1e-10}, {"range", 1e-12}}},
      {"fit", {{"discard", 0.1}, {"window", 0.5}, {"min_r2", 0.99}}},
      {"measure", {{"n_samples", 100}}},
      {"weights", {{"margin", 2.0}, {"inputs", nullptr}}},
      {"gap", {{"models", nullptr}}},
      {"output", {{"dir", nullptr}}},
      {"sweep", nullptr},
  };
  return d;
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

json merge(const json& def, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError("field '" + path + "' must be an object");
  json out = def;
  for (const auto& [key, value] : user.items()) {
    const std::string p = join(path, key);
    if (!def.contains(key)) throw ConfigError("unknown field '" + p + "'");
    if (def[key].is_object()) {
      out[key] = merge(def[key], value, p);
    } else {
      out[key] = value;
    }
  }
  return out;
}

// Typed access to a (sub)object; errors name the full dotted field.
struct Reader {
  const json& root;
  std::string prefix;

  std::string name(const std::string& field) const { return join(prefix, field); }

  const json& at(const std::string& dotted) const {
    const json* cur = &root;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) cur = &cur->at(part);
    return *cur;
  }
  double num(const std::string& field) const {
    const json& v = at(field);
    if (!v.is_number()) throw ConfigError("field '" + name(field) + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("field '" + name(field) + "' must be finite");
    return x;
  }
  long long integer(const std::string& field) const {
    const json& v = at(field);
    if (!v.is_number_integer()) throw ConfigError("field '" + name(field) + "' must be an integer");
    return v.get<long long>();
  }
  std::size_t count(const std::string& field) const {
    const long long v = integer(field);
    if (v <= 0) throw ConfigError("field '" + name(field) + "' must be positive");
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& field) const {
    const json& v = at(field);
    if (!v.is_boolean()) throw ConfigError("field '" + name(field) + "' must be true or false");
    return v.get<bool>();
  }
  std::string text(const std::string& field) const {
    const json& v = at(field);
    if (!v.is_string()) throw ConfigError("field '" + name(field) + "' must be a string");
    return v.get<std::string>();
  }
};

template <class F>
auto field_guard(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
}

ModelSpec parse_model(const json& m, const std::string& path, const PhaseGrid& grid) {
  const Reader rd{m, path};
  ModelSpec s;
  s.kind = field_guard(rd.name("kind"), [&] { return model_kind_from_string(rd.text("kind")); });
  s.kappa = rd.num("kappa");
  s.rho = rd.num("rho");
  s.epsilon = static_cast<int>(rd.integer("epsilon"));
  s.poisson = rd.flag("poisson");
  const json& pot = m.at("potential");
  if (!pot.is_null()) {
    const json pd = {{"kind", "cosine"}, {"amplitude", 0.0}, {"mode", 1}, {"values", nullptr}};
    const json p = merge(pd, pot, rd.name("potential"));
    const Reader pr{p, rd.name("potential")};
    const std::string kind = pr.text("kind");
    if (kind == "cosine") {
      const double amp = pr.num("amplitude");
      const auto mode = pr.integer("mode");
      if (mode < 1) throw ConfigError("field '" + pr.name("mode") + "' must be >= 1");
      s.potential = PotentialSpec::cosine(grid, amp, static_cast<int>(mode));
    } else if (kind == "values") {
      const json& vals = p.at("values");
      if (!vals.is_array()) throw ConfigError("field '" + pr.name("values") + "' must be an array");
      std::vector<double> v;
      for (const auto& x : vals) {
        if (!x.is_number()) throw ConfigError("field '" + pr.name("values") + "' must hold numbers");
        v.push_back(x.get<double>());
      }
      s.potential = field_guard(pr.name("values"),
                                [&] { return PotentialSpec::from_values(grid, std::move(v)); });
    } else {
      throw ConfigError("field '" + pr.name("kind") + "' must be 'cosine' or 'values'");
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json unwrap_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (doc.contains("config") && doc.contains("tool")) return doc.at("config");
  return doc;
}

json normalised_config(const json& cfg) { return merge(defaults(), unwrap_config(cfg), ""); }

RunConfig parse_run_config(const json& raw) {
  const json c = normalised_config(raw);
  const Reader rd{c, ""};
  RunConfig r;
  r.n_x = rd.count("grid.n_x");
  r.n_v = rd.count("grid.n_v");
  r.length_x = rd.num("grid.length_x");
  r.v_max = rd.num("grid.v_max");
  const std::string q = rd.text("grid.quadrature");
  if (q == "uniform") {
    r.quadrature = Quadrature::Uniform;
  } else if (q == "gauss" || q == "gauss_legendre") {
    r.quadrature = Quadrature::GaussLegendre;
  } else {
    throw ConfigError("field 'grid.quadrature' must be 'uniform' or 'gauss'");
  }
  const GridPtr grid = field_guard("grid", [&] { return r.make_grid(); });
  r.model = parse_model(c.at("model"), "model", *grid);

  r.t_end = rd.num("time.t_end");
  r.dt = rd.num("time.dt");
  r.sample_every = static_cast<int>(rd.integer("time.sample_every"));
  r.scheme = field_guard("time.scheme", [&] { return scheme_from_string(rd.text("time.scheme")); });

  r.initial.kind =
      field_guard("initial.kind", [&] { return initial_kind_from_string(rd.text("initial.kind")); });
  r.initial.amplitude = rd.num("initial.amplitude");
  r.initial.mode = static_cast<int>(rd.integer("initial.mode"));
  r.initial.normalise = rd.flag("initial.normalise");

  const long long seed = rd.integer("seed");
  if (seed < 0) throw ConfigError("field 'seed' must be non-negative");
  r.seed = static_cast<std::uint64_t>(seed);
  r.linear = rd.flag("linear");
  r.transport_only = rd.flag("transport_only");
  r.project_initial = rd.flag("project_initial");
  r.order = static_cast<int>(rd.integer("order"));
  r.potential_bound = rd.num("bounds.potential");
  r.amplitude_bound = rd.num("bounds.amplitude");
  r.tol.monotone = rd.num("tolerances.monotone");
  r.tol.monotone_f2 = rd.num("tolerances.monotone_f2");
  r.tol.mass = rd.num("tolerances.mass");
  r.tol.range = rd.num("tolerances.range");
  r.fit.discard = rd.num("fit.discard");
  r.fit.window = rd.num("fit.window");
  r.fit.min_r2 = rd.num("fit.min_r2");
  if (rd.integer("measure.n_samples") < 100) {
    throw ConfigError("field 'measure.n_samples' must be >= 100");
  }
  r.measure_samples = static_cast<int>(rd.integer("measure.n_samples"));
  r.weight_margin = parse_weight_margin(c);

  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return r;
}

std::vector<ModelSpec> parse_gap_models(const json& raw, const PhaseGrid& grid) {
  const json c = normalised_config(raw);
  const json& list = c.at("gap").at("models");
  if (list.is_null()) return {parse_model(c.at("model"), "model", grid)};
  if (!list.is_array() || list.empty()) {
    throw ConfigError("field 'gap.models' must be a non-empty array of model objects");
  }
  std::vector<ModelSpec> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "gap.models[" + std::to_string(i) + "]";
    out.push_back(parse_model(merge(defaults().at("model"), list[i], path), path, grid));
  }
  return out;
}

std::optional<WeightInputs> parse_weight_inputs(const json& raw) {
  const json c = normalised_config(raw);
  const json& in = c.at("weights").at("inputs");
  if (in.is_null()) return std::nullopt;
  const json d = {{"lambda", 1.0}, {"c1", 1.0}, {"c2", 1.0}, {"c_l", 1.0}, {"nu3", 1.0}};
  const json m = merge(d, in, "weights.inputs");
  const Reader rd{m, "weights.inputs"};
  return WeightInputs{rd.num("lambda"), rd.num("c1"), rd.num("c2"), rd.num("c_l"), rd.num("nu3")};
}

double parse_weight_margin(const json& raw) {
  const json c = normalised_config(raw);
  const double m = Reader{c, ""}.num("weights.margin");
  if (!(m >= 1.0)) throw ConfigError("field 'weights.margin' must be >= 1");
  return m;
}

std::filesystem::path output_dir(const json& cfg, const Options& opts) {
  if (opts.out) return *opts.out;
  const json c = normalised_config(cfg);
  if (!c["output"]["dir"].is_null()) return Reader{c, ""}.text("output.dir");
  if (const char* env = std::getenv("HYPOKIN_OUT"); env && *env) return env;
  return "hypokin_out";
}

}  // namespace hypokin::cli
