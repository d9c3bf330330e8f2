#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "poolsim/simulator.hpp"

namespace poolsim {

// Configuration failure naming the offending field (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string poolsim_version();

// Strict parser: unknown keys are rejected, messages carry the JSON path.
ScenarioConfig parse_scenario_json(const nlohmann::json& j);
ScenarioConfig load_scenario_file(const std::string& path, nlohmann::json* raw_out = nullptr);

EngineConfig parse_engine_json(const nlohmann::json& j, const std::string& path);

// summary.csv, agents.csv, optional buffer_trace.csv, manifest.json.
void write_report_bundle(const std::string& dir, const ScenarioConfig& cfg,
                         const nlohmann::json& config_echo, const SimulationResult& result);

// Snapshot CSV (miner,cumulative,pending) for replayed ledgers.
void write_snapshot_csv(const std::string& path, const LedgerSnapshot& snap);

// Render a double with full round-trip precision (byte-stable reports).
std::string format_double(double x);

} // namespace poolsim
