#pragma once

#include <cstdint>
#include <vector>

#include "poolsim/events.hpp"
#include "poolsim/rng.hpp"
#include "poolsim/schedule.hpp"

namespace poolsim {

// Expected block count for hashrate h (hash/s) over t seconds at difficulty D.
double expected_blocks(double hashrate, double seconds, double difficulty);

struct SoloStats {
    double mean_btc;
    double variance_btc2;
    double rel_stddev; // fraction of the expected reward
    double p_any_payment;
};

SoloStats solo_payout_stats(double hashrate, double seconds, double difficulty, double block_reward);

// One Bernoulli block draw at probability p_eff in (0, 1].
bool draw_share(RngStream& rng, double p_eff);

struct MinerSpec {
    MinerId id;
    double weight;          // hashrate weight for share attribution
    double share_difficulty = 1.0;
};

// Deterministic share/block event source. Shares are attributed to miner i
// with probability (weight_i/d_i) / sum_j(weight_j/d_j): a miner submitting
// difficulty-d shares finds them d times less often.
class StreamGenerator {
public:
    StreamGenerator(RngStream rng,
                    DifficultySchedule difficulty,
                    RewardSchedule reward,
                    std::vector<MinerSpec> miners,
                    double pool_hashrate_shares_per_sec = 0.0);

    ShareEvent next();
    std::uint64_t index() const { return index_; }

    const DifficultySchedule& difficulty() const { return difficulty_; }
    const RewardSchedule& reward() const { return reward_; }

private:
    RngStream rng_;
    DifficultySchedule difficulty_;
    RewardSchedule reward_;
    std::vector<MinerSpec> miners_;
    std::vector<double> cum_rate_; // cumulative attribution rates
    double total_rate_ = 0.0;
    double hashrate_ = 0.0; // shares/s at difficulty 1; 0 disables sim_time
    std::uint64_t index_ = 0;
};

std::vector<ShareEvent> generate_stream(RngStream rng,
                                        const DifficultySchedule& difficulty,
                                        const RewardSchedule& reward,
                                        const std::vector<MinerSpec>& miners,
                                        std::uint64_t n_shares);

} // namespace poolsim
