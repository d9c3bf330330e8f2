#pragma once

#include <string>
#include <vector>

#include "poolsim/simulator.hpp"

namespace poolsim {

struct Preset {
    std::string name;
    std::string description;
};

std::vector<Preset> preset_list();
bool has_preset(const std::string& name);

// Runs a named preset and writes its outputs under out_dir.
// Returns 0 on success, 3 on runtime failure.
int run_preset(const std::string& name, const std::string& out_dir,
               std::uint64_t seed_override, int replicas_override);

// Scenario builders shared by presets and the acceptance suite.
ScenarioConfig scenario_geometric_fairness();
ScenarioConfig scenario_hop_single_pool();

} // namespace poolsim
