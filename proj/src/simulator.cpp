#include "poolsim/simulator.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "poolsim/buffer_engines.hpp"
#include "poolsim/oracles.hpp"
#include "poolsim/rng.hpp"
#include "poolsim/round_engines.hpp"

namespace poolsim {

namespace {

constexpr int kSoloPool = -2;

struct PoolRt {
    const PoolSpec* spec = nullptr;
    std::unique_ptr<RewardEngine> engine;
    SmppsEngine* smpps = nullptr;
    std::uint64_t round_age = 0;
    bool probe_done_round = false;
    KahanSum units;   // sum of p_eff fed to this pool (difficulty units)
    KahanSum revenue; // block rewards found here
    KahanSum paid;    // miner payouts
    KahanSum fees;    // explicit operator fee records
    std::uint64_t blocks = 0;
};

enum class LiwPhase { Waiting, Ambush };

struct AgentRt {
    const AgentSpec* spec = nullptr;
    LiwPhase phase = LiwPhase::Waiting;
    int ambush_pool = -1;
    double ambush_until = 0.0;
};

struct Allocation {
    int agent;
    int pool; // >= 0, or kSoloPool
    double rate;
};

bool policy_is_static(const AgentPolicy& p) {
    return p.kind == PolicyKind::Constant || p.kind == PolicyKind::Saboteur;
}

} // namespace

int effective_thread_cap() {
    int cap = omp_get_max_threads();
    if (const char* env = std::getenv("POOLSIM_THREADS")) {
        int v = std::atoi(env);
        if (v > 0 && v < cap) cap = v;
    }
    return cap;
}

ReplicaResult run_replica(const ScenarioConfig& cfg, std::uint64_t stream_id) {
    if (cfg.pools.empty()) throw std::invalid_argument("scenario needs at least one pool");
    const int n_pools = static_cast<int>(cfg.pools.size());
    const int n_agents = static_cast<int>(cfg.agents.size());
    const MinerId probe_id = cfg.probe_miner_id();
    const MinerId hopper_id = cfg.hopper_miner_id();
    const int n_miners = hopper_id + 1;

    RngStream rng(cfg.seed, stream_id);

    std::vector<PoolRt> pools(n_pools);
    bool any_saturating = false;
    for (int j = 0; j < n_pools; ++j) {
        pools[j].spec = &cfg.pools[j];
        pools[j].engine = make_engine(cfg.pools[j].engine);
        pools[j].smpps = dynamic_cast<SmppsEngine*>(pools[j].engine.get());
        any_saturating |= cfg.pools[j].saturating_hopper;
    }
    EngineConfig solo_cfg;
    solo_cfg.method = Method::Solo;
    SoloEngine solo(solo_cfg);

    std::vector<AgentRt> agents(n_agents);
    bool all_static = true;
    bool any_liw = false;
    double x0 = 0.0; // hopper threshold, resolved on demand
    bool need_x0 = any_saturating;
    for (int i = 0; i < n_agents; ++i) {
        agents[i].spec = &cfg.agents[i];
        const auto& pol = cfg.agents[i].policy;
        if (!policy_is_static(pol)) all_static = false;
        if (pol.kind == PolicyKind::LieInWait) any_liw = true;
        if (pol.kind == PolicyKind::PropHopper && pol.threshold <= 0) need_x0 = true;
        for (int pj : pol.pools)
            if (pj < 0 || pj >= n_pools)
                throw std::invalid_argument("agent policy references an unknown pool");
        if (pol.pools.empty() && pol.kind != PolicyKind::Constant)
            throw std::invalid_argument("agent policy needs target pools");
    }
    if (need_x0) x0 = oracle::prop_hop_threshold();
    if (cfg.probe.trigger != ProbeSpec::Trigger::None &&
        (cfg.probe.pool < 0 || cfg.probe.pool >= n_pools))
        throw std::invalid_argument("probe references an unknown pool");

    ReplicaResult res;
    res.miner_shares.assign(n_miners, 0.0);
    res.miner_payout.assign(n_miners, 0.0);
    res.miner_solo_shares.assign(n_miners, 0.0);
    res.miner_solo_payout.assign(n_miners, 0.0);
    res.pool_operator_net.assign(n_pools, 0.0);
    res.pool_fee_records.assign(n_pools, 0.0);
    res.pool_blocks.assign(n_pools, 0);
    std::vector<KahanSum> payout_acc(n_miners);
    std::vector<KahanSum> solo_acc(n_miners);

    // Probe bookkeeping: one tagged share at a time; finalize on the next tag.
    bool probe_open = false;
    double probe_units0 = 0.0;
    double probe_w = 0.0;
    std::uint64_t last_probe_at = 0;
    // stop tagging in the last quarter so every tag's window completes
    const std::uint64_t probe_cutoff = cfg.horizon_shares - cfg.horizon_shares / 4;
    auto finalize_probe = [&]() {
        if (!probe_open) return;
        res.probe_count += 1;
        res.probe_sum += probe_w;
        res.probe_sum_sq += probe_w * probe_w;
        probe_open = false;
        probe_w = 0.0;
    };

    std::vector<Allocation> allocations;
    std::vector<double> cum_rates;
    std::vector<agents::PoolObservation> obs(n_pools);
    bool alloc_dirty = true;

    auto rebuild_observations = [&](std::uint64_t index) {
        double p = cfg.difficulty.p_at(index);
        double reward = cfg.reward.reward_at(index);
        for (int j = 0; j < n_pools; ++j) {
            obs[j].x = p * static_cast<double>(pools[j].round_age);
            obs[j].has_buffer = pools[j].smpps != nullptr;
            obs[j].buffer = obs[j].has_buffer ? pools[j].smpps->buffer() : 0.0;
            obs[j].p = p;
            obs[j].reward = reward;
        }
    };

    auto rebuild_allocations = [&](std::uint64_t index) {
        allocations.clear();
        for (int i = 0; i < n_agents; ++i) {
            const auto& pol = agents[i].spec->policy;
            double rate = agents[i].spec->hashrate / agents[i].spec->share_difficulty;
            switch (pol.kind) {
                case PolicyKind::Constant:
                case PolicyKind::Saboteur:
                    for (int pj : pol.pools) allocations.push_back({i, pj, rate});
                    if (pol.pools.empty()) allocations.push_back({i, kSoloPool, rate});
                    break;
                case PolicyKind::Intermittent:
                    if (agents::intermittent_active(index, pol.duty_cycle, pol.duty_period))
                        allocations.push_back({i, pol.pools.front(), rate});
                    break;
                case PolicyKind::PropHopper: {
                    double thr = pol.threshold > 0 ? pol.threshold : x0;
                    int choice = agents::prop_hopper_decide(obs, pol.pools, thr,
                                                            pol.fallback_solo);
                    allocations.push_back({i, choice == agents::kSolo ? kSoloPool : choice, rate});
                    break;
                }
                case PolicyKind::BufferHopper:
                    if (agents::buffer_hopper_decide(obs[pol.pools.front()]))
                        allocations.push_back({i, pol.pools.front(), rate});
                    break;
                case PolicyKind::LieInWait:
                    if (agents[i].phase == LiwPhase::Ambush) {
                        double full = rate * static_cast<double>(pol.pools.size());
                        allocations.push_back({i, agents[i].ambush_pool, full});
                    } else {
                        for (int pj : pol.pools) allocations.push_back({i, pj, rate});
                    }
                    break;
            }
        }
        cum_rates.clear();
        double acc = 0.0;
        for (const auto& a : allocations) {
            acc += a.rate;
            cum_rates.push_back(acc);
        }
    };

    std::vector<PayoutEvent> payouts;
    payouts.reserve(64);
    double sim_time = 0.0;
    std::uint64_t index = 0;

    auto note_payouts = [&](PoolRt* pool) {
        for (const auto& p : payouts) {
            if (p.recipient == kOperator) {
                if (pool) pool->fees.add(p.amount);
                continue;
            }
            payout_acc[p.recipient].add(p.amount);
            if (pool) pool->paid.add(p.amount);
            if (p.recipient == probe_id && probe_open && pool) {
                probe_w += p.amount;
                res.probe_paid += p.amount;
                res.probe_delay_weighted +=
                    p.amount * (pool->units.value() - probe_units0);
            }
        }
        payouts.clear();
    };

    auto feed_pool = [&](int j, const ShareEvent& ev) {
        PoolRt& pool = pools[j];
        pool.units.add(ev.p_eff);
        pool.engine->step(ev, payouts);
        if (ev.is_block) {
            pool.blocks += 1;
            pool.revenue.add(ev.reward);
            pool.round_age = 0;
            pool.probe_done_round = false;
        } else {
            pool.round_age += 1;
        }
        note_payouts(&pool);
    };

    // Submits agent i's withheld block now. A block is never discarded: a
    // spoiled ambush releases it early (losing the surprise, not the work).
    auto force_release = [&](int i) {
        auto& a = agents[i];
        int j = a.ambush_pool;
        a.phase = LiwPhase::Waiting;
        ShareEvent ev;
        ev.index = index++;
        ev.miner = static_cast<MinerId>(i);
        ev.d = a.spec->share_difficulty;
        ev.p_eff = std::min(1.0, ev.d / cfg.difficulty.difficulty_at(ev.index));
        ev.reward = cfg.reward.reward_at(ev.index);
        ev.is_block = true;
        ev.sim_time = sim_time;
        feed_pool(j, ev);
        res.events += 1;
        alloc_dirty = true;
    };

    // An outside block spoils every ambush in progress.
    auto void_ambushes = [&]() {
        for (int i = 0; i < n_agents; ++i)
            if (agents[i].phase == LiwPhase::Ambush) force_release(i);
    };

    auto inject_saturating = [&](int j) {
        // Worst-case hopper swarm: the round instantly ages to x0*D, owned by
        // a virtual hopper, without consuming network hash slots.
        double D = cfg.difficulty.difficulty_at(index);
        ShareEvent ev;
        ev.index = index++;
        ev.miner = hopper_id;
        ev.d = x0 * D;
        ev.p_eff = x0;
        ev.reward = cfg.reward.reward_at(ev.index);
        ev.is_block = false;
        ev.sim_time = sim_time;
        feed_pool(j, ev);
        res.events += 1;
    };

    const bool record_trace = cfg.record_buffer_trace && stream_id == 0;
    int trace_pool = -1;
    for (int j = 0; j < n_pools && trace_pool < 0; ++j)
        if (pools[j].smpps) trace_pool = j;

    if (n_agents == 0) return res; // nothing mines: a zero-event run

    for (int j = 0; j < n_pools; ++j)
        if (cfg.pools[j].saturating_hopper) inject_saturating(j);

    while (res.events < cfg.horizon_shares) {
        // 1) pending lie-in-wait releases (the planned ambush ran its course)
        bool released = false;
        if (any_liw) {
            for (int i = 0; i < n_agents && !released; ++i) {
                auto& a = agents[i];
                if (a.phase != LiwPhase::Ambush || sim_time < a.ambush_until) continue;
                res.ambush_successes += 1;
                force_release(i);
                void_ambushes(); // the published block spoils other holds
                released = true;
            }
            if (released) continue;
        }

        if (!all_static || alloc_dirty || allocations.empty()) {
            if (!all_static) rebuild_observations(index);
            rebuild_allocations(index);
            alloc_dirty = false;
        }
        if (allocations.empty() || cum_rates.back() <= 0)
            throw std::runtime_error("no active hashrate in scenario");
        double total_rate = cum_rates.back();

        // 2) probe injection
        bool probe_now = false;
        if (cfg.probe.trigger != ProbeSpec::Trigger::None && res.events < probe_cutoff) {
            const auto& pr = cfg.probe;
            PoolRt& target = pools[pr.pool];
            std::uint64_t since = res.events - last_probe_at;
            switch (pr.trigger) {
                case ProbeSpec::Trigger::Stride:
                    probe_now = pr.stride > 0 && since >= pr.stride;
                    break;
                case ProbeSpec::Trigger::RoundAge:
                    probe_now = !target.probe_done_round && target.round_age == pr.round_age &&
                                (pr.stride == 0 || since >= pr.stride);
                    break;
                case ProbeSpec::Trigger::BufferPositive:
                case ProbeSpec::Trigger::BufferNegative: {
                    if (target.smpps) {
                        double r = target.smpps->buffer();
                        bool want_pos = pr.trigger == ProbeSpec::Trigger::BufferPositive;
                        probe_now = (want_pos ? r > 0 : r < 0) &&
                                    (pr.stride == 0 || since >= pr.stride);
                    }
                    break;
                }
                default:
                    break;
            }
            if (probe_now) {
                finalize_probe();
                last_probe_at = res.events;
                PoolRt& pool = pools[pr.pool];
                pool.probe_done_round = true;
                probe_open = true;
                // delays are measured from the share's end on the unit timeline
                probe_units0 = pool.units.value() + cfg.difficulty.p_at(index);
                ShareEvent ev;
                ev.index = index++;
                ev.miner = probe_id;
                ev.d = 1.0;
                ev.p_eff = cfg.difficulty.p_at(ev.index);
                ev.reward = cfg.reward.reward_at(ev.index);
                ev.is_block = rng.bernoulli(ev.p_eff);
                ev.sim_time = sim_time;
                res.miner_shares[probe_id] += 1;
                feed_pool(pr.pool, ev);
                if (ev.is_block) {
                    void_ambushes();
                    if (cfg.pools[pr.pool].saturating_hopper) inject_saturating(pr.pool);
                }
                res.events += 1;
                sim_time += 1.0 / total_rate;
                continue;
            }
        }

        // 3) natural share slot
        double pick = rng.next_double() * total_rate;
        std::size_t ai = 0;
        while (ai + 1 < cum_rates.size() && pick >= cum_rates[ai]) ++ai;
        const Allocation& alloc = allocations[ai];
        const AgentSpec& spec = *agents[alloc.agent].spec;

        ShareEvent ev;
        ev.index = index++;
        ev.miner = static_cast<MinerId>(alloc.agent);
        ev.d = spec.share_difficulty;
        ev.p_eff = std::min(1.0, ev.d / cfg.difficulty.difficulty_at(ev.index));
        ev.reward = cfg.reward.reward_at(ev.index);
        ev.is_block = rng.bernoulli(ev.p_eff);
        ev.sim_time = sim_time;
        res.miner_shares[alloc.agent] += 1;

        if (alloc.pool == kSoloPool) {
            res.miner_solo_shares[alloc.agent] += 1;
            solo.step(ev, payouts);
            for (const auto& p : payouts) solo_acc[p.recipient].add(p.amount);
            note_payouts(nullptr);
            if (ev.is_block) void_ambushes();
        } else {
            const auto& pol = spec.policy;
            bool withheld = false;
            if (ev.is_block && !cfg.pools[alloc.pool].oblivious) {
                if (pol.kind == PolicyKind::Saboteur) {
                    ev = agents::saboteur_filter(ev);
                } else if (pol.kind == PolicyKind::LieInWait) {
                    auto& a = agents[alloc.agent];
                    if (a.phase == LiwPhase::Ambush)
                        force_release(alloc.agent); // a second find ends the first hold
                    a.phase = LiwPhase::Ambush;
                    a.ambush_pool = alloc.pool;
                    a.ambush_until = sim_time + pol.ambush_time;
                    res.ambushes += 1;
                    withheld = true;
                    alloc_dirty = true;
                }
            }
            if (!withheld) {
                feed_pool(alloc.pool, ev);
                if (ev.is_block) {
                    void_ambushes();
                    alloc_dirty = alloc_dirty || any_liw;
                    if (cfg.pools[alloc.pool].saturating_hopper)
                        inject_saturating(alloc.pool);
                }
            }
        }

        res.events += 1;
        sim_time += 1.0 / total_rate;

        if (trace_pool >= 0) {
            double r = pools[trace_pool].smpps->buffer();
            res.buffer_min = std::min(res.buffer_min, r);
            if (record_trace && res.events % cfg.trace_every == 0)
                res.buffer_trace.emplace_back(res.events, r);
        }
    }

    finalize_probe();
    for (int m = 0; m < n_miners; ++m) {
        res.miner_payout[m] = payout_acc[m].value();
        res.miner_solo_payout[m] = solo_acc[m].value();
    }
    res.miner_pending.assign(n_miners, 0.0);
    {
        std::map<MinerId, double> pending;
        for (auto& pool : pools) pool.engine->pending_rewards(pending);
        for (const auto& [id, v] : pending)
            if (id >= 0 && id < n_miners) res.miner_pending[id] += v;
    }
    for (int j = 0; j < n_pools; ++j) {
        res.pool_operator_net[j] = pools[j].revenue.value() - pools[j].paid.value();
        res.pool_fee_records[j] = pools[j].fees.value();
        res.pool_blocks[j] = pools[j].blocks;
    }
    return res;
}

SimulationResult run_scenario(const ScenarioConfig& cfg, bool parallel) {
    for (const auto& p : cfg.pools) p.engine.validate();
    if (cfg.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    SimulationResult out;
    out.replicas.resize(cfg.replicas);
    if (parallel) {
        int threads = effective_thread_cap();
        std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (int r = 0; r < cfg.replicas; ++r) {
            try {
                out.replicas[r] = run_replica(cfg, static_cast<std::uint64_t>(r));
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (int r = 0; r < cfg.replicas; ++r)
            out.replicas[r] = run_replica(cfg, static_cast<std::uint64_t>(r));
    }
    out.summary = summarize(cfg, out.replicas);
    return out;
}

StatSummary summarize(const ScenarioConfig& cfg, const std::vector<ReplicaResult>& reps) {
    StatSummary s;
    const MinerId probe_id = cfg.probe_miner_id();
    int n_miners = probe_id + 2;
    for (int m = 0; m < n_miners; ++m) {
        std::string name;
        if (m < static_cast<int>(cfg.agents.size()))
            name = cfg.agents[m].name;
        else if (m == probe_id)
            name = "probe";
        else
            name = "hopper-swarm";
        std::vector<double> per_share, total;
        double shares_sum = 0.0;
        for (const auto& r : reps) {
            if (m >= static_cast<int>(r.miner_shares.size())) continue;
            if (r.miner_shares[m] > 0)
                per_share.push_back(r.miner_payout[m] / r.miner_shares[m]);
            total.push_back(r.miner_payout[m]);
            shares_sum += r.miner_shares[m];
        }
        if (total.empty()) continue;
        MinerSummary ms;
        ms.name = name;
        ms.mean_per_share = estimate_mean(per_share);
        ms.total_payout = estimate_mean(total);
        ms.shares_per_replica = shares_sum / reps.size();
        if (ms.shares_per_replica > 0 || m < static_cast<int>(cfg.agents.size()))
            s.miners.push_back(std::move(ms));
    }
    for (std::size_t j = 0; j < cfg.pools.size(); ++j) {
        PoolSummary ps;
        ps.name = cfg.pools[j].name;
        std::vector<double> net, fee;
        double blocks_sum = 0.0;
        for (const auto& r : reps) {
            net.push_back(r.pool_operator_net[j]);
            if (r.pool_blocks[j] > 0)
                fee.push_back(r.pool_fee_records[j] / r.pool_blocks[j]);
            blocks_sum += static_cast<double>(r.pool_blocks[j]);
        }
        ps.operator_net = estimate_mean(net);
        ps.fee_per_block = estimate_mean(fee);
        ps.blocks_per_replica = blocks_sum / reps.size();
        s.pools.push_back(std::move(ps));
    }
    std::vector<double> probe_means, probe_vars, maturities, success;
    for (const auto& r : reps) {
        if (r.probe_count > 0) {
            double n = static_cast<double>(r.probe_count);
            probe_means.push_back(r.probe_sum / n);
            if (r.probe_count > 1) {
                double var = (r.probe_sum_sq - r.probe_sum * r.probe_sum / n) / (n - 1.0);
                probe_vars.push_back(var);
            }
        }
        if (r.probe_paid > 0)
            maturities.push_back(r.probe_delay_weighted / r.probe_paid);
        if (r.ambushes > 0)
            success.push_back(static_cast<double>(r.ambush_successes) /
                              static_cast<double>(r.ambushes));
    }
    s.probe_mean_payout = estimate_mean(probe_means);
    s.probe_variance = estimate_mean(probe_vars);
    s.probe_maturity = estimate_mean(maturities);
    s.ambush_success_rate = estimate_mean(success);
    return s;
}

} // namespace poolsim
