#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "optfair/errors.hpp"
#include "optfair/presets.hpp"
#include "optfair/runner.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct GlobalFlags {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 1;
};

void add_global_flags(CLI::App* cmd, GlobalFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--preset", flags.preset, "named experiment preset");
  cmd->add_option("--seed", flags.seed, "master seed (overrides preset/config)");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--workers", flags.workers, "parallel trial workers")->check(CLI::PositiveNumber);
}

// preset < config file < explicit flags, shallow-merged per block.
json resolve_config(const std::string& command, const GlobalFlags& flags, const json& overrides) {
  json config;
  if (!flags.preset.empty()) {
    config = optfair::preset_config(flags.preset);
    const std::string preset_command = config.value("command", command);
    if (preset_command != command)
      throw optfair::ValidationError("preset '" + flags.preset + "' belongs to command '" +
                                     preset_command + "'");
    config["preset"] = flags.preset;
  }
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw optfair::IoError("cannot open config file " + flags.config_path);
    json file_config;
    try {
      in >> file_config;
    } catch (const json::parse_error& e) {
      throw optfair::ValidationError("config parse error in " + flags.config_path + ": " +
                                     e.what());
    }
    for (auto& [key, value] : file_config.items()) {
      if (value.is_object() && config.contains(key) && config[key].is_object()) {
        for (auto& [inner_key, inner_value] : value.items()) config[key][inner_key] = inner_value;
      } else {
        config[key] = value;
      }
    }
  }
  for (auto& [key, value] : overrides.items()) {
    if (value.is_object() && config.contains(key) && config[key].is_object()) {
      for (auto& [inner_key, inner_value] : value.items()) config[key][inner_key] = inner_value;
    } else {
      config[key] = value;
    }
  }
  if (flags.seed) config["master_seed"] = *flags.seed;
  if (!config.contains("master_seed")) config["master_seed"] = 0;
  config["workers"] = flags.workers;
  config["command"] = command;
  return config;
}

int dispatch(const std::string& command, const GlobalFlags& flags, const json& overrides) {
  const json config = resolve_config(command, flags, overrides);
  const std::filesystem::path out_dir =
      flags.out.empty() ? std::filesystem::path("runs") / command : std::filesystem::path(flags.out);
  optfair::run_command(command, config, out_dir);
  std::cout << "wrote " << (out_dir / "results.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimizer fairness laboratory"};
  app.require_subcommand(1);

  GlobalFlags warmup_flags, density_flags, theorems_flags, train_flags, sweep_flags, metrics_flags;
  json warmup_over, density_over, theorems_over, train_over, sweep_over, metrics_over;

  auto* warmup = app.add_subcommand("warmup", "Monte-Carlo convergence-to-fair-neighborhood runs");
  add_global_flags(warmup, warmup_flags);
  double p0 = 0, threshold = 0;
  int trials = 0, epochs = 0;
  warmup->add_option("--p0", p0, "subgroup-0 sampling probability")
      ->each([&](const std::string&) { warmup_over["warmup"]["p0"] = p0; });
  warmup->add_option("--trials", trials, "Monte-Carlo trials")
      ->each([&](const std::string&) { warmup_over["warmup"]["trials"] = trials; });
  warmup->add_option("--epochs", epochs, "epochs per trial")
      ->each([&](const std::string&) { warmup_over["warmup"]["epochs"] = epochs; });
  warmup->add_option("--threshold", threshold, "fair-neighborhood half-width")
      ->each([&](const std::string&) { warmup_over["warmup"]["fair_threshold"] = threshold; });

  auto* density = app.add_subcommand("density", "closed-form long-run iterate densities");
  add_global_flags(density, density_flags);
  double dp0 = 0, deta = 0, dtheta = 0;
  density->add_option("--p0", dp0, "subgroup-0 sampling probability")
      ->each([&](const std::string&) { density_over["density"]["p0"] = dp0; });
  density->add_option("--eta", deta, "learning rate")
      ->each([&](const std::string&) { density_over["density"]["eta"] = deta; });
  density->add_option("--theta", dtheta, "gradient-noise scale")
      ->each([&](const std::string&) { density_over["density"]["theta"] = dtheta; });

  auto* theorems = app.add_subcommand("theorems", "empirical update/gap bound checks");
  add_global_flags(theorems, theorems_flags);
  long tdraws = 0;
  int tsteps = 0;
  theorems->add_option("--draws", tdraws, "Monte-Carlo draws")
      ->each([&](const std::string&) { theorems_over["theorems"]["draws"] = tdraws; });
  theorems->add_option("--steps", tsteps, "accumulator iterations")
      ->each([&](const std::string&) { theorems_over["theorems"]["steps"] = tsteps; });

  auto* train = app.add_subcommand("train", "desk-scale training with fairness reports");
  add_global_flags(train, train_flags);
  int tepochs = 0, tbatch = 0, tseeds = 0;
  train->add_option("--epochs", tepochs, "training epochs")
      ->each([&](const std::string&) { train_over["train"]["epochs"] = tepochs; });
  train->add_option("--batch", tbatch, "mini-batch size")
      ->each([&](const std::string&) { train_over["train"]["batch_size"] = tbatch; });
  train->add_option("--n-seeds", tseeds, "number of paired seeds")
      ->each([&](const std::string&) { train_over["train"]["n_seeds"] = tseeds; });

  auto* sweep = app.add_subcommand("sweep", "fairness difference across imbalance levels");
  add_global_flags(sweep, sweep_flags);
  std::vector<double> fractions;
  int sseeds = 0;
  sweep->add_option("--fractions", fractions, "minority fractions")
      ->each([&](const std::string&) { sweep_over["sweep"]["fractions"] = fractions; });
  sweep->add_option("--n-seeds", sseeds, "number of paired seeds")
      ->each([&](const std::string&) { sweep_over["sweep"]["n_seeds"] = sseeds; });

  auto* metrics = app.add_subcommand("metrics", "fairness metrics from a prediction log");
  add_global_flags(metrics, metrics_flags);
  std::string input;
  metrics->add_option("input", input, "prediction-log CSV")
      ->each([&](const std::string&) { metrics_over["metrics"]["input"] = input; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (warmup->parsed()) return dispatch("warmup", warmup_flags, warmup_over);
    if (density->parsed()) return dispatch("density", density_flags, density_over);
    if (theorems->parsed()) return dispatch("theorems", theorems_flags, theorems_over);
    if (train->parsed()) return dispatch("train", train_flags, train_over);
    if (sweep->parsed()) return dispatch("sweep", sweep_flags, sweep_over);
    if (metrics->parsed()) return dispatch("metrics", metrics_flags, metrics_over);
    std::cerr << "no command given\n";
    return kExitValidation;
  } catch (const optfair::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const optfair::UndefinedValueError& e) {
    std::cerr << "undefined value: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
