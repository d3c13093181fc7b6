#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "hypokin/cli.hpp"

using namespace hypokin;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hypokin_cli_test_" + std::to_string(std::hash<std::string>{}(
                                      std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
                                      std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()))));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& cfg) {
  const fs::path p = dir / name;
  cli::write_text(p, cfg.dump(2));
  return p;
}

int quiet(const std::string& name, const std::function<int()>& body) { return cli::guarded(name, body); }

json bgk_config() {
  return {{"model", {{"kind", "relaxation"}, {"kappa", 1.0}}},
          {"grid", {{"n_x", 16}, {"n_v", 32}, {"v_max", 8.0}}},
          {"time", {{"t_end", 20.0}, {"dt", 0.002}, {"sample_every", 50}}}};
}

cli::Options out(const fs::path& p) {
  cli::Options o;
  o.out = p;
  o.jobs = 2;
  return o;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    CHECK(std::stod(cli::format_double(x)) == x);
  }
}

TEST_CASE("config parsing applies defaults and rejects bad fields") {
  const RunConfig rc = cli::parse_run_config(json::object());
  CHECK(rc.n_x == 16);
  CHECK(rc.dt == 1e-3);
  CHECK_THROWS_WITH_AS(cli::parse_run_config(json{{"time", {{"dt", 0}}}}), doctest::Contains("time.dt"),
                       cli::ConfigError);
  CHECK_THROWS_WITH_AS(cli::parse_run_config(json{{"grid", {{"nx", 8}}}}), doctest::Contains("grid.nx"),
                       cli::ConfigError);
  CHECK_THROWS_WITH_AS(cli::parse_run_config(json{{"grid", {{"n_v", "many"}}}}), doctest::Contains("grid.n_v"),
                       cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_run_config(json{{"measure", {{"n_samples", 10}}}}), cli::ConfigError);
  const json manifest = {{"tool", "hypokin"}, {"config", {{"seed", 9}}}};
  CHECK(cli::parse_run_config(manifest).seed == 9);
}

TEST_CASE("simulate writes the documented files and reruns identically") {
  TempDir tmp;
  const fs::path cfg = write_config(tmp.path, "bgk.json", bgk_config());
  REQUIRE(quiet("simulate", [&] { return cli::cmd_simulate(cfg, out(tmp.path / "a")); }) == 0);
  const std::string series = slurp(tmp.path / "a" / "series.csv");
  CHECK(series.rfind("t,l2,h1,lyapunov,lambda,mass\n", 0) == 0);
  const json m = json::parse(slurp(tmp.path / "a" / "manifest.json"));
  CHECK(m["tool"] == "hypokin");
  CHECK(m["seed"] == 1);
  CHECK(m["fit"]["conclusive"] == true);
  CHECK(m.contains("constants"));
  CHECK(m.contains("weights"));
  CHECK(m.contains("equilibrium"));

  REQUIRE(quiet("simulate", [&] {
            return cli::cmd_simulate(tmp.path / "a" / "manifest.json", out(tmp.path / "b"));
          }) == 0);
  CHECK(slurp(tmp.path / "b" / "series.csv") == series);
}

TEST_CASE("simulate exit codes") {
  TempDir tmp;
  json bad = bgk_config();
  bad["time"]["dt"] = 0;
  const fs::path p = write_config(tmp.path, "bad.json", bad);
  CHECK(quiet("simulate", [&] { return cli::cmd_simulate(p, out(tmp.path / "o")); }) == cli::kSchemaError);

  const json fermion = {{"model", {{"kind", "semiclassical"}, {"epsilon", 1}}},
                        {"linear", false},
                        {"initial", {{"kind", "mode_kernel"}, {"amplitude", 5.0}}},
                        {"bounds", {{"amplitude", 1000.0}}},
                        {"time", {{"t_end", 1.0}, {"dt", 0.01}, {"sample_every", 10}}}};
  const fs::path f = write_config(tmp.path, "fermion.json", fermion);
  CHECK(quiet("simulate", [&] { return cli::cmd_simulate(f, out(tmp.path / "o")); }) == cli::kRuntimeError);

  CHECK(quiet("simulate", [&] { return cli::cmd_simulate(tmp.path / "missing.json", out(tmp.path / "o")); }) ==
        cli::kIoError);
  cli::write_text(tmp.path / "broken.json", "{ not json");
  CHECK(quiet("simulate", [&] { return cli::cmd_simulate(tmp.path / "broken.json", out(tmp.path / "o")); }) ==
        cli::kSchemaError);
}

TEST_CASE("gap table for the three model families") {
  TempDir tmp;
  const json cfg = {{"grid", {{"n_x", 8}, {"n_v", 64}, {"v_max", 8.0}}},
                    {"gap",
                     {{"models", json::array({{{"kind", "relaxation"}},
                                              {{"kind", "semiclassical"}, {"epsilon", 1}, {"rho", 1.0}},
                                              {{"kind", "fokker_planck"}}})}}}};
  const fs::path p = write_config(tmp.path, "gap.json", cfg);
  REQUIRE(quiet("gap", [&] { return cli::cmd_gap(p, out(tmp.path / "g")); }) == 0);
  const json g = json::parse(slurp(tmp.path / "g" / "gaps.json"));
  REQUIRE(g["models"].size() == 3);
  const json& bgk = g["models"][0];
  CHECK(std::abs(bgk["bound"].get<double>() - 1.0) <= 1e-12);
  CHECK(std::abs(bgk["numeric"].get<double>() - 1.0) <= 1e-10);
  const json& fer = g["models"][1];
  CHECK(fer["margin"].get<double>() > 0.0);
  const json& fp = g["models"][2];
  CHECK(std::abs(fp["numeric"].get<double>() - 1.0) <= 1e-3);
  CHECK(fp.contains("dirichlet_constant"));
}

TEST_CASE("weights command reproduces the worked tuple and is deterministic") {
  TempDir tmp;
  const json worked = {
      {"weights",
       {{"margin", 1.0}, {"inputs", {{"lambda", 1.0}, {"c1", 1.0}, {"c2", 1.0}, {"c_l", 1.0}, {"nu3", 1.0}}}}}};
  const fs::path p = write_config(tmp.path, "w.json", worked);
  REQUIRE(quiet("weights", [&] { return cli::cmd_weights(p, out(tmp.path / "w")); }) == 0);
  const json w = json::parse(slurp(tmp.path / "w" / "weights.json"));
  CHECK(w["weights"]["a"].get<double>() == doctest::Approx(1.5));
  CHECK(w["weights"]["alpha"].get<double>() == doctest::Approx(5.0));
  CHECK(w["weights"]["beta"].get<double>() == doctest::Approx(2.0));
  CHECK(w["weights"]["gamma"].get<double>() == doctest::Approx(3.0));
  CHECK(w["weights"]["eta"].get<double>() == doctest::Approx(3.0));
  for (int i = 0; i < 4; ++i) CHECK(w["conditions"][i].get<double>() <= -1.0 + 1e-12);

  const fs::path m = write_config(tmp.path, "m.json", bgk_config());
  REQUIRE(quiet("weights", [&] { return cli::cmd_weights(m, out(tmp.path / "m1")); }) == 0);
  REQUIRE(quiet("weights", [&] { return cli::cmd_weights(m, out(tmp.path / "m2")); }) == 0);
  CHECK(slurp(tmp.path / "m1" / "weights.json") == slurp(tmp.path / "m2" / "weights.json"));
}

TEST_CASE("sweeps") {
  TempDir tmp;
  SUBCASE("rates follow the spectral abscissa across kappa") {
    json cfg = bgk_config();
    cfg["sweep"] = {{"model.kappa", {1.0, 2.0, 4.0}}};
    const fs::path p = write_config(tmp.path, "s.json", cfg);
    REQUIRE(quiet("sweep", [&] { return cli::cmd_sweep(p, out(tmp.path / "s")); }) == 0);
    std::istringstream csv(slurp(tmp.path / "s" / "sweep_summary.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("point,model.kappa,status,tau", 0) == 0);
    std::vector<double> tau;
    while (std::getline(csv, line)) {
      std::vector<std::string> cols;
      std::stringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
      REQUIRE(cols.size() >= 4);
      CHECK(cols[2] == "ok");
      tau.push_back(std::stod(cols[3]));
    }
    REQUIRE(tau.size() == 3);
    CHECK(tau[0] > tau[1]);
    CHECK(tau[1] > tau[2]);
    CHECK(fs::exists(tmp.path / "s" / "point_002" / "manifest.json"));
  }
  SUBCASE("a single point equals simulate") {
    json cfg = bgk_config();
    cfg["sweep"] = {{"model.kappa", {1.0}}};
    const fs::path p = write_config(tmp.path, "one.json", cfg);
    const fs::path q = write_config(tmp.path, "plain.json", bgk_config());
    REQUIRE(quiet("sweep", [&] { return cli::cmd_sweep(p, out(tmp.path / "s")); }) == 0);
    REQUIRE(quiet("simulate", [&] { return cli::cmd_simulate(q, out(tmp.path / "p")); }) == 0);
    CHECK(slurp(tmp.path / "s" / "point_000" / "series.csv") == slurp(tmp.path / "p" / "series.csv"));
  }
  SUBCASE("an invalid point is recorded without aborting") {
    json cfg = bgk_config();
    cfg["time"]["t_end"] = 5.0;
    cfg["sweep"] = {{"model.kappa", {1.0, -1.0}}};
    const fs::path p = write_config(tmp.path, "bad.json", cfg);
    REQUIRE(quiet("sweep", [&] { return cli::cmd_sweep(p, out(tmp.path / "s")); }) == 0);
    const std::string csv = slurp(tmp.path / "s" / "sweep_summary.csv");
    CHECK(csv.find("1,-1.0,invalid") != std::string::npos);
    CHECK(csv.find("0,1.0,ok") != std::string::npos);
  }
  SUBCASE("an empty grid is a schema error") {
    json cfg = bgk_config();
    cfg["sweep"] = json::object();
    const fs::path p = write_config(tmp.path, "empty.json", cfg);
    CHECK(quiet("sweep", [&] { return cli::cmd_sweep(p, out(tmp.path / "s")); }) == cli::kSchemaError);
  }
}

TEST_CASE("output directory precedence") {
  const json with_dir = {{"output", {{"dir", "from_config"}}}};
  cli::Options o;
  CHECK(cli::output_dir(with_dir, o) == fs::path("from_config"));
  o.out = "from_flag";
  CHECK(cli::output_dir(with_dir, o) == fs::path("from_flag"));
}
