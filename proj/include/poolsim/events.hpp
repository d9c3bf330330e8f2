#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace poolsim {

using MinerId = std::int32_t;

// Distinguished ledger recipient for the pool operator.
constexpr MinerId kOperator = -1;

// Payout cause for immediate (non-block-funded) payments.
constexpr std::int64_t kImmediate = -1;

// One submitted share. p_eff = d/D and reward = B as current at submission.
struct ShareEvent {
    std::uint64_t index = 0;
    MinerId miner = 0;
    double d = 1.0;
    double p_eff = 0.0;
    double reward = 0.0;
    bool is_block = false;
    double sim_time = std::numeric_limits<double>::quiet_NaN();

    bool has_time() const { return sim_time == sim_time; }
};

// A single payment to a miner (or the operator, which may be negative).
struct PayoutEvent {
    MinerId recipient = 0;
    double amount = 0.0;
    std::int64_t cause = kImmediate; // block ordinal, or kImmediate
    std::uint64_t at_index = 0;
};

// Replay log: CSV with columns index,miner,d,p_eff,B,is_block.
void write_replay_log(std::ostream& out, const std::vector<ShareEvent>& events);
void write_replay_log_file(const std::string& path, const std::vector<ShareEvent>& events);

// Throws std::runtime_error naming the offending line on malformed rows.
std::vector<ShareEvent> read_replay_log(std::istream& in);
std::vector<ShareEvent> read_replay_log_file(const std::string& path);

} // namespace poolsim
