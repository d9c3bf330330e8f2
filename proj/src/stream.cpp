#include "poolsim/stream.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace poolsim {

namespace {
constexpr double kHashesPerShare = 4294967296.0; // 2^32
}

double expected_blocks(double hashrate, double seconds, double difficulty) {
    if (hashrate < 0 || seconds < 0)
        throw std::invalid_argument("hashrate and time must be nonnegative");
    if (difficulty < 1)
        throw std::invalid_argument("difficulty must be >= 1");
    return hashrate * seconds / (kHashesPerShare * difficulty);
}

SoloStats solo_payout_stats(double hashrate, double seconds, double difficulty, double block_reward) {
    double lambda = expected_blocks(hashrate, seconds, difficulty);
    SoloStats s;
    s.mean_btc = lambda * block_reward;
    s.variance_btc2 = lambda * block_reward * block_reward;
    s.rel_stddev = lambda > 0 ? 1.0 / std::sqrt(lambda) : std::numeric_limits<double>::infinity();
    s.p_any_payment = -std::expm1(-lambda);
    return s;
}

bool draw_share(RngStream& rng, double p_eff) {
    if (!(p_eff > 0.0) || p_eff > 1.0)
        throw std::invalid_argument("p_eff must be in (0, 1]");
    return rng.bernoulli(p_eff);
}

StreamGenerator::StreamGenerator(RngStream rng,
                                 DifficultySchedule difficulty,
                                 RewardSchedule reward,
                                 std::vector<MinerSpec> miners,
                                 double pool_hashrate_shares_per_sec)
    : rng_(rng),
      difficulty_(std::move(difficulty)),
      reward_(std::move(reward)),
      miners_(std::move(miners)),
      hashrate_(pool_hashrate_shares_per_sec) {
    if (miners_.empty())
        throw std::invalid_argument("miner list must not be empty");
    for (const auto& m : miners_) {
        if (!(m.weight > 0))
            throw std::invalid_argument("miner weights must be positive");
        if (!(m.share_difficulty > 0))
            throw std::invalid_argument("share difficulty must be positive");
        total_rate_ += m.weight / m.share_difficulty;
        cum_rate_.push_back(total_rate_);
    }
}

ShareEvent StreamGenerator::next() {
    ShareEvent ev;
    ev.index = index_;
    double pick = rng_.next_double() * total_rate_;
    std::size_t i = 0;
    while (i + 1 < cum_rate_.size() && pick >= cum_rate_[i]) ++i;
    ev.miner = miners_[i].id;
    ev.d = miners_[i].share_difficulty;
    double D = difficulty_.difficulty_at(index_);
    ev.p_eff = ev.d / D;
    if (ev.p_eff > 1.0) ev.p_eff = 1.0;
    ev.reward = reward_.reward_at(index_);
    ev.is_block = draw_share(rng_, ev.p_eff);
    if (hashrate_ > 0) ev.sim_time = static_cast<double>(index_) / hashrate_;
    ++index_;
    return ev;
}

std::vector<ShareEvent> generate_stream(RngStream rng,
                                        const DifficultySchedule& difficulty,
                                        const RewardSchedule& reward,
                                        const std::vector<MinerSpec>& miners,
                                        std::uint64_t n_shares) {
    StreamGenerator gen(rng, difficulty, reward, miners);
    std::vector<ShareEvent> out;
    out.reserve(n_shares);
    for (std::uint64_t i = 0; i < n_shares; ++i) out.push_back(gen.next());
    return out;
}

void write_replay_log(std::ostream& out, const std::vector<ShareEvent>& events) {
    out << "index,miner,d,p_eff,B,is_block\n";
    char buf[160];
    for (const auto& ev : events) {
        std::snprintf(buf, sizeof(buf), "%llu,%d,%.17g,%.17g,%.17g,%d\n",
                      static_cast<unsigned long long>(ev.index), ev.miner, ev.d,
                      ev.p_eff, ev.reward, ev.is_block ? 1 : 0);
        out << buf;
    }
}

void write_replay_log_file(const std::string& path, const std::vector<ShareEvent>& events) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    write_replay_log(f, events);
}

std::vector<ShareEvent> read_replay_log(std::istream& in) {
    std::vector<ShareEvent> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("index", 0) == 0) continue; // header
        ShareEvent ev;
        unsigned long long idx;
        int miner, is_block;
        int n = std::sscanf(line.c_str(), "%llu,%d,%lf,%lf,%lf,%d",
                            &idx, &miner, &ev.d, &ev.p_eff, &ev.reward, &is_block);
        if (n != 6)
            throw std::runtime_error("replay log: malformed row at line " + std::to_string(lineno));
        ev.index = idx;
        ev.miner = miner;
        ev.is_block = is_block != 0;
        if (!(ev.p_eff > 0.0) || ev.p_eff > 1.0)
            throw std::runtime_error("replay log: p_eff out of range at line " + std::to_string(lineno));
        events.push_back(ev);
    }
    return events;
}

std::vector<ShareEvent> read_replay_log_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_replay_log(f);
}

} // namespace poolsim
