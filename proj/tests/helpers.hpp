#pragma once

#include <cstdint>
#include <vector>

#include "poolsim/engine.hpp"
#include "poolsim/rng.hpp"

// Deterministic event sequences for engine-level tests.
struct EventBuilder {
    std::uint64_t idx = 0;
    double p = 0.01;
    double reward = 50.0;
    double time_step = 0.0; // > 0 attaches sim_time = index * time_step
    std::vector<poolsim::ShareEvent> events;

    EventBuilder& share(poolsim::MinerId m, bool block = false, double d = 1.0) {
        poolsim::ShareEvent ev;
        ev.index = idx++;
        ev.miner = m;
        ev.d = d;
        ev.p_eff = p * d;
        ev.reward = reward;
        ev.is_block = block;
        if (time_step > 0) ev.sim_time = static_cast<double>(ev.index) * time_step;
        events.push_back(ev);
        return *this;
    }

    EventBuilder& block(poolsim::MinerId m, double d = 1.0) { return share(m, true, d); }

    // `count` shares round-robin over miners 0..miners-1, block flags drawn at p.
    EventBuilder& random_run(std::uint64_t count, int miners, poolsim::RngStream& rng) {
        for (std::uint64_t i = 0; i < count; ++i)
            share(static_cast<poolsim::MinerId>(i % miners), rng.bernoulli(p));
        return *this;
    }
};

struct EngineRun {
    poolsim::LedgerSnapshot snapshot;
    std::vector<poolsim::PayoutEvent> payouts;
    std::vector<std::pair<std::int64_t, double>> blocks; // (ordinal, reward)
};

inline EngineRun run_events(const poolsim::EngineConfig& cfg,
                            const std::vector<poolsim::ShareEvent>& events) {
    EngineRun out;
    auto engine = poolsim::make_engine(cfg);
    poolsim::Ledger ledger;
    std::vector<poolsim::PayoutEvent> scratch;
    std::int64_t block_ordinal = 0;
    for (const auto& ev : events) {
        ledger.on_event(ev);
        if (ev.is_block) out.blocks.emplace_back(block_ordinal++, ev.reward);
        scratch.clear();
        engine->step(ev, scratch);
        for (const auto& pay : scratch) {
            ledger.on_payout(pay);
            out.payouts.push_back(pay);
        }
    }
    out.snapshot = ledger.snapshot(engine.get());
    return out;
}

inline double miner_total(const EngineRun& run, poolsim::MinerId m) {
    auto it = run.snapshot.cumulative.find(m);
    return it == run.snapshot.cumulative.end() ? 0.0 : it->second;
}
