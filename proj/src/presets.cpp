#include "poolsim/presets.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "poolsim/acceptance.hpp"
#include "poolsim/oracles.hpp"
#include "poolsim/scenario.hpp"

namespace poolsim {

namespace {

nlohmann::json echo_minimal(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["pools"] = nlohmann::json::array();
    for (const auto& p : cfg.pools) {
        nlohmann::json pj;
        pj["name"] = p.name;
        pj["method"] = method_name(p.engine.method);
        j["pools"].push_back(pj);
    }
    j["agents"] = cfg.agents.size();
    j["horizon_shares"] = cfg.horizon_shares;
    j["replicas"] = cfg.replicas;
    j["seed"] = cfg.seed;
    return j;
}

int run_scenario_preset(ScenarioConfig cfg, const std::string& out_dir,
                        std::uint64_t seed_override, int replicas_override) {
    if (seed_override) cfg.seed = seed_override;
    if (replicas_override > 0) cfg.replicas = replicas_override;
    SimulationResult result = run_scenario(cfg);
    write_report_bundle(out_dir, cfg, echo_minimal(cfg), result);
    return 0;
}

} // namespace

ScenarioConfig scenario_geometric_fairness() {
    ScenarioConfig cfg;
    PoolSpec pool;
    pool.name = "geo";
    pool.engine.method = Method::Geometric;
    pool.engine.fee = 0.05;
    pool.engine.c = 0.1;
    cfg.pools.push_back(pool);
    for (int i = 0; i < 3; ++i) {
        AgentSpec a;
        a.name = "miner" + std::to_string(i);
        a.hashrate = 1.0 + i;
        a.policy.kind = PolicyKind::Constant;
        a.policy.pools = {0};
        cfg.agents.push_back(a);
    }
    cfg.difficulty = DifficultySchedule(StepSchedule::constant(1000.0));
    cfg.reward = RewardSchedule(StepSchedule::constant(50.0));
    cfg.horizon_shares = 1000000;
    cfg.replicas = 16;
    cfg.seed = 1;
    return cfg;
}

ScenarioConfig scenario_hop_single_pool() {
    ScenarioConfig cfg;
    PoolSpec pool;
    pool.name = "prop";
    pool.engine.method = Method::Proportional;
    pool.engine.fee = 0.0;
    cfg.pools.push_back(pool);
    AgentSpec honest;
    honest.name = "continuous";
    honest.hashrate = 1.0;
    honest.policy.kind = PolicyKind::Constant;
    honest.policy.pools = {0};
    cfg.agents.push_back(honest);
    AgentSpec hopper;
    hopper.name = "hopper";
    hopper.hashrate = 0.01;
    hopper.policy.kind = PolicyKind::PropHopper;
    hopper.policy.pools = {0};
    hopper.policy.fallback_solo = true;
    cfg.agents.push_back(hopper);
    cfg.difficulty = DifficultySchedule(StepSchedule::constant(1000.0));
    cfg.reward = RewardSchedule(StepSchedule::constant(50.0));
    cfg.horizon_shares = 2000000;
    cfg.replicas = 16;
    cfg.seed = 7;
    return cfg;
}

std::vector<Preset> preset_list() {
    std::vector<Preset> list = {
        {"hop-table", "amplification-factor table for hopping m proportional pools (CSV)"},
        {"geometric-fairness", "fixed-roster geometric pool, per-miner means with CIs"},
        {"prop-hopper", "single proportional pool attacked by an optimal hopper"},
    };
    for (int i = 1; i <= acceptance::kCriteria; ++i)
        list.push_back({"criterion-" + (i < 10 ? "0" + std::to_string(i) : std::to_string(i)),
                        "acceptance criterion " + std::to_string(i)});
    return list;
}

bool has_preset(const std::string& name) {
    for (const auto& p : preset_list())
        if (p.name == name) return true;
    return false;
}

int run_preset(const std::string& name, const std::string& out_dir,
               std::uint64_t seed_override, int replicas_override) {
    std::filesystem::create_directories(out_dir);
    if (name == "hop-table") {
        std::ofstream f(out_dir + "/hop_table.csv");
        f << "m,with_fallback,without_fallback\n";
        for (const auto& row : oracle::hop_table(25))
            f << row.m << "," << format_double(row.with_fallback) << ","
              << format_double(row.without_fallback) << "\n";
        std::cout << "wrote " << out_dir << "/hop_table.csv\n";
        return 0;
    }
    if (name == "geometric-fairness")
        return run_scenario_preset(scenario_geometric_fairness(), out_dir, seed_override,
                                   replicas_override);
    if (name == "prop-hopper")
        return run_scenario_preset(scenario_hop_single_pool(), out_dir, seed_override,
                                   replicas_override);
    if (name.rfind("criterion-", 0) == 0) {
        int id = std::stoi(name.substr(10));
        auto res = acceptance::run_criterion(id);
        std::ofstream f(out_dir + "/criterion_" + std::to_string(id) + ".txt");
        std::string line = std::string(res.pass ? "[PASS] " : "[FAIL] ") + "criterion " +
                           std::to_string(res.id) + ": " + res.name + " — " + res.detail;
        f << line << "\n";
        std::cout << line << "\n";
        return res.pass ? 0 : 3;
    }
    std::cerr << "unknown preset: " << name << "\n";
    return 2;
}

} // namespace poolsim
