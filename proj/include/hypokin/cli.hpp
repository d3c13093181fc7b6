#pragma once

// Command implementations behind the hypokin executable: JSON config
// ingestion, run orchestration, sweeps and the on-disk formats.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypokin/solver.hpp"

namespace hypokin::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kSchemaError = 2, kRuntimeError = 3, kIoError = 4 };

// Invalid or unknown config content; maps to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
// File system failures; maps to exit code 4.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// A manifest (object with a "config" member) is accepted wherever a config is.
nlohmann::json unwrap_config(const nlohmann::json& doc);

// Fills defaults; rejects unknown keys and bad values with the dotted field name.
RunConfig parse_run_config(const nlohmann::json& cfg);
// The config with every default made explicit (echoed into manifests).
nlohmann::json normalised_config(const nlohmann::json& cfg);

// Models listed under gap.models (each completed from the model defaults), or
// the single top-level model.
std::vector<ModelSpec> parse_gap_models(const nlohmann::json& cfg, const PhaseGrid& grid);
// weights.inputs when present (lambda, c1, c2, c_l, nu3), and weights.margin.
std::optional<WeightInputs> parse_weight_inputs(const nlohmann::json& cfg);
double parse_weight_margin(const nlohmann::json& cfg);

struct Options {
  std::optional<std::filesystem::path> out;
  unsigned jobs = 0;  // 0: hardware concurrency
  std::optional<std::uint64_t> seed;
};

// --out, then output.dir of the config, then $HYPOKIN_OUT, then ./hypokin_out.
std::filesystem::path output_dir(const nlohmann::json& cfg, const Options& opts);

// 17 significant digits, round-trip exact.
std::string format_double(double x);
std::string series_csv(const DecayReport& r);
nlohmann::json manifest_json(const nlohmann::json& config, const RunResult& r, double wall_seconds);
nlohmann::json constants_json(const CoercivityConstants& c);
nlohmann::json weights_json(const LyapunovWeights& w);

int cmd_simulate(const std::filesystem::path& config_path, const Options& opts);
int cmd_gap(const std::filesystem::path& config_path, const Options& opts);
int cmd_weights(const std::filesystem::path& config_path, const Options& opts);
int cmd_sweep(const std::filesystem::path& config_path, const Options& opts);

// Runs a command body and maps exceptions to exit codes with a diagnostic.
int guarded(const std::string& command, const std::function<int()>& body);

}  // namespace hypokin::cli
