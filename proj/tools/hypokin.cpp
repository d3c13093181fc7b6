#include <CLI11.hpp>

#include "hypokin/cli.hpp"

namespace cli = hypokin::cli;

int main(int argc, char** argv) {
  CLI::App app{"Hypocoercive decay of linear and weakly nonlinear kinetic equations"};
  app.set_version_flag("--version", std::string(cli::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  unsigned jobs = 0;
  std::uint64_t seed = 0;

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const std::filesystem::path&, const cli::Options&);
  };
  const Entry entries[] = {
      {"simulate", "run one trajectory; writes manifest.json and series.csv", cli::cmd_simulate},
      {"gap", "analytic and numeric spectral gaps; writes gaps.json", cli::cmd_gap},
      {"weights", "Lyapunov weights and their conditions; writes weights.json", cli::cmd_weights},
      {"sweep", "cartesian parameter sweep; writes sweep_summary.csv", cli::cmd_sweep},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  std::vector<CLI::Option*> seed_opts, out_opts;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("config", config, "JSON config or manifest")->required();
    out_opts.push_back(sub->add_option("--out", out, "output directory"));
    sub->add_option("--jobs", jobs, "worker threads for sweeps (default: all cores)");
    seed_opts.push_back(sub->add_option("--seed", seed, "override the config seed"));
    subs.emplace_back(sub, &e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kSchemaError;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto [sub, entry] = subs[i];
    if (!sub->parsed()) continue;
    cli::Options opts;
    if (out_opts[i]->count()) opts.out = out;
    if (seed_opts[i]->count()) opts.seed = seed;
    opts.jobs = jobs;
    return cli::guarded(entry->name, [&] { return entry->fn(config, opts); });
  }
  return cli::kSchemaError;
}
