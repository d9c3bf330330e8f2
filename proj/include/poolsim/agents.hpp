#pragma once

#include <cstdint>
#include <vector>

#include "poolsim/events.hpp"

namespace poolsim::agents {

// Virtual destinations for hashrate besides a real pool index.
constexpr int kSolo = -2;
constexpr int kOff = -3;

// What a strategy is allowed to see about a pool.
struct PoolObservation {
    double x = 0.0;          // round age as a fraction of difficulty (p * I)
    bool has_buffer = false; // SMPPS-style pools expose R
    double buffer = 0.0;
    double p = 0.0;
    double reward = 0.0;
};

// Mine the candidate pool with the youngest round; if every candidate is
// older than x0 and fallback is enabled, mine solo instead.
int prop_hopper_decide(const std::vector<PoolObservation>& obs,
                       const std::vector<int>& candidates, double x0, bool fallback);

// Mine iff the buffer is positive.
bool buffer_hopper_decide(const PoolObservation& obs);

// Block-withholding saboteur: the pool never sees the attacker's blocks.
ShareEvent saboteur_filter(const ShareEvent& ev);

// Deterministic duty cycle on the global share clock.
bool intermittent_active(std::uint64_t global_index, double duty_cycle,
                         std::uint64_t period);

} // namespace poolsim::agents
