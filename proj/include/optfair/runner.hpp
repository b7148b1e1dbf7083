#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "optfair/optimizer.hpp"
#include "optfair/subgroup.hpp"
#include "optfair/train.hpp"
#include "optfair/warmup.hpp"

namespace optfair {

// Shared implementation behind the CLI: runs one command from a resolved JSON
// config and writes config.json, results.csv, and summary.json into out_dir.
// Throws ValidationError / NumericError / IoError; the CLI maps those to exit
// codes 2 and 3.
void run_command(const std::string& command, nlohmann::json config,
                 const std::filesystem::path& out_dir);

// Config-block parsers, exposed for tests.
OptimizerConfig optimizer_from_json(const nlohmann::json& j);
std::string optimizer_label(const nlohmann::json& j);
WarmupConfig warmup_from_json(const nlohmann::json& block, std::uint64_t master_seed);
NgosSpec ngos_from_json(const nlohmann::json& j);
SyntheticSpec synthetic_from_json(const nlohmann::json& j, std::uint64_t master_seed);
TrainOptions train_options_from_json(const nlohmann::json& block);

// Deterministic float formatting used in every emitted CSV.
std::string format_number(double x);

}  // namespace optfair
