#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poolsim/agents.hpp"
#include "poolsim/engine.hpp"
#include "poolsim/schedule.hpp"
#include "poolsim/stats.hpp"

namespace poolsim {

struct PoolSpec {
    std::string name;
    EngineConfig engine;
    bool oblivious = false;          // block withholding has no effect here
    bool saturating_hopper = false;  // inject x0*D hopper weight at round start
};

enum class PolicyKind { Constant, Intermittent, PropHopper, BufferHopper, Saboteur, LieInWait };

struct AgentPolicy {
    PolicyKind kind = PolicyKind::Constant;
    std::vector<int> pools;          // candidate pool indices
    double duty_cycle = 1.0;         // intermittent
    std::uint64_t duty_period = 1000;
    bool fallback_solo = true;       // prop hopper
    double threshold = 0.0;          // prop hopper x0; <= 0 means oracle value
    double ambush_time = 0.0;        // lie-in-wait T (seconds)
};

struct AgentSpec {
    std::string name;
    double hashrate = 1.0;           // share-finding rate at difficulty 1 (shares/s)
    double share_difficulty = 1.0;
    AgentPolicy policy;
};

struct ProbeSpec {
    enum class Trigger { None, Stride, RoundAge, BufferPositive, BufferNegative };
    Trigger trigger = Trigger::None;
    int pool = 0;
    std::uint64_t stride = 0;     // Stride: every N global events (also rate-limits
                                  // the buffer triggers; 0 = one probe per round)
    std::uint64_t round_age = 0;  // RoundAge: inject when the round is this old
};

struct ScenarioConfig {
    std::vector<PoolSpec> pools;
    std::vector<AgentSpec> agents;
    DifficultySchedule difficulty;
    RewardSchedule reward;
    std::uint64_t horizon_shares = 100000;
    int replicas = 8;
    std::uint64_t seed = 1;
    ProbeSpec probe;
    bool record_buffer_trace = false; // replica 0, first pool with a buffer
    std::uint64_t trace_every = 1000;

    MinerId probe_miner_id() const { return static_cast<MinerId>(agents.size()); }
    MinerId hopper_miner_id() const { return static_cast<MinerId>(agents.size()) + 1; }
};

struct ReplicaResult {
    std::vector<double> miner_shares;   // indexed by miner id
    std::vector<double> miner_payout;
    std::vector<double> miner_pending;  // engine pending estimates at horizon
    std::vector<double> miner_solo_shares; // subset of shares mined solo
    std::vector<double> miner_solo_payout;
    std::vector<double> pool_operator_net;
    std::vector<double> pool_fee_records;
    std::vector<std::uint64_t> pool_blocks;
    std::uint64_t events = 0;
    // probe aggregates
    std::uint64_t probe_count = 0;
    double probe_sum = 0.0, probe_sum_sq = 0.0;       // per-probe payout moments
    double probe_paid = 0.0, probe_delay_weighted = 0.0; // units-delay, payout-weighted
    // lie-in-wait bookkeeping
    std::uint64_t ambushes = 0, ambush_successes = 0;
    std::vector<std::pair<std::uint64_t, double>> buffer_trace;
    double buffer_min = 0.0;
};

struct MinerSummary {
    std::string name;
    Estimate mean_per_share; // BTC per submitted share
    Estimate total_payout;
    double shares_per_replica = 0.0;
};

struct PoolSummary {
    std::string name;
    Estimate operator_net;
    Estimate fee_per_block;
    double blocks_per_replica = 0.0;
};

struct StatSummary {
    std::vector<MinerSummary> miners;
    std::vector<PoolSummary> pools;
    Estimate probe_mean_payout;      // per tagged share
    Estimate probe_variance;         // per-share payout variance
    Estimate probe_maturity;         // payout-weighted delay, difficulty units
    Estimate ambush_success_rate;
};

struct SimulationResult {
    StatSummary summary;
    std::vector<ReplicaResult> replicas;
};

// Executes config.replicas independent replicas. Replica r uses RNG stream r;
// results are identical whether replicas run serially or OpenMP-parallel.
SimulationResult run_scenario(const ScenarioConfig& config, bool parallel = true);

// Single replica, exposed for the serial reference path and tests.
ReplicaResult run_replica(const ScenarioConfig& config, std::uint64_t stream_id);

StatSummary summarize(const ScenarioConfig& config, const std::vector<ReplicaResult>& replicas);

// Effective thread cap: min(OpenMP default, POOLSIM_THREADS if set).
int effective_thread_cap();

} // namespace poolsim
