#include "poolsim/agents.hpp"

#include <limits>
#include <stdexcept>

namespace poolsim::agents {

int prop_hopper_decide(const std::vector<PoolObservation>& obs,
                       const std::vector<int>& candidates, double x0, bool fallback) {
    if (candidates.empty())
        throw std::invalid_argument("prop hopper needs at least one candidate pool");
    int best = candidates.front();
    double best_x = std::numeric_limits<double>::infinity();
    for (int idx : candidates) {
        double x = obs[idx].x;
        if (x < best_x) {
            best_x = x;
            best = idx;
        }
    }
    if (fallback && best_x > x0) return kSolo;
    return best;
}

bool buffer_hopper_decide(const PoolObservation& obs) {
    return obs.has_buffer && obs.buffer > 0.0;
}

ShareEvent saboteur_filter(const ShareEvent& ev) {
    ShareEvent filtered = ev;
    filtered.is_block = false;
    return filtered;
}

bool intermittent_active(std::uint64_t global_index, double duty_cycle,
                         std::uint64_t period) {
    if (period == 0) return true;
    double frac = static_cast<double>(global_index % period) / static_cast<double>(period);
    return frac < duty_cycle;
}

} // namespace poolsim::agents
