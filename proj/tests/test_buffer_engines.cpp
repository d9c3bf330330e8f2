#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "poolsim/buffer_engines.hpp"
#include "poolsim/stats.hpp"

using namespace poolsim;

TEST_CASE("mpps: a lucky first block is capped by the tiny PPS balance") {
    EventBuilder b;
    b.p = 0.01;
    b.block(0);
    EngineConfig cfg;
    cfg.method = Method::Mpps;
    auto run = run_events(cfg, b.events);
    // PPS balance after one share is p B = 0.5; proportional balance is 50.
    CHECK(miner_total(run, 0) == doctest::Approx(0.5));
}

TEST_CASE("mpps: paid never exceeds min(PPS, proportional) and pool never overpays") {
    RngStream rng(71, 0);
    EventBuilder b;
    b.p = 0.02;
    b.random_run(30000, 3, rng);
    EngineConfig cfg;
    cfg.method = Method::Mpps;
    MppsEngine engine(cfg);
    Ledger ledger;
    std::vector<PayoutEvent> out;
    bool invariant = true;
    for (const auto& ev : b.events) {
        ledger.on_event(ev);
        out.clear();
        engine.step(ev, out);
        for (const auto& p : out) ledger.on_payout(p);
        for (MinerId m = 0; m < 3; ++m)
            invariant &= engine.paid_so_far(m) <=
                         std::min(engine.pps_balance(m), engine.prop_balance(m)) + 1e-9;
    }
    CHECK(invariant);
    double paid = 0.0;
    for (const auto& [id, v] : ledger.snapshot().cumulative) paid += v;
    CHECK(paid <= ledger.revenue() + 1e-9);
}

TEST_CASE("mpps: per-share expected payout sits below (1-f) p B on finite horizons") {
    RunningStats mean;
    const double horizon_blocks = 4.0; // short horizon, visible loss
    const std::uint64_t shares = static_cast<std::uint64_t>(horizon_blocks * 100);
    for (std::uint64_t rep = 0; rep < 400; ++rep) {
        RngStream rng(72, rep);
        EventBuilder b;
        b.p = 0.01;
        b.random_run(shares, 2, rng);
        EngineConfig cfg;
        cfg.method = Method::Mpps;
        auto run = run_events(cfg, b.events);
        mean.add((miner_total(run, 0) + miner_total(run, 1)) / shares);
    }
    double fair = 0.01 * 50.0;
    // one-sided: strictly below fair at 3 sigma
    CHECK(mean.mean() + 3 * mean.stderr_mean() < fair);
}

TEST_CASE("smpps: positive buffer behaves as immediate full payment") {
    EventBuilder b;
    b.p = 0.01;
    b.block(0); // buffer jumps to +B - pB
    b.share(1);
    b.share(1);
    EngineConfig cfg;
    cfg.method = Method::Smpps;
    auto run = run_events(cfg, b.events);
    // all three shares paid in full (p B each)
    CHECK(miner_total(run, 0) == doctest::Approx(0.5));
    CHECK(miner_total(run, 1) == doctest::Approx(1.0));
}

TEST_CASE("smpps: dues plus buffer equal revenue minus payouts at every step") {
    RngStream rng(73, 0);
    EventBuilder b;
    b.p = 0.02;
    b.random_run(20000, 3, rng);
    EngineConfig cfg;
    cfg.method = Method::Smpps;
    SmppsEngine engine(cfg);
    Ledger ledger;
    std::vector<PayoutEvent> out;
    bool identity = true;
    for (const auto& ev : b.events) {
        ledger.on_event(ev);
        out.clear();
        engine.step(ev, out);
        for (const auto& p : out) ledger.on_payout(p);
        double paid = 0.0;
        for (const auto& [id, k] : ledger.miners()) paid += k.value();
        identity &= std::abs(engine.due_total() + engine.buffer() -
                             (ledger.revenue() - paid)) < 1e-6;
    }
    CHECK(identity);
}

TEST_CASE("smpps: negative buffer splits blocks in proportion to dues") {
    EventBuilder b;
    b.p = 0.01;
    // dues: miner 0 has 3 shares, miner 1 has 1 share; then miner 1 finds a block
    b.share(0).share(0).share(0);
    b.block(1);
    EngineConfig cfg;
    cfg.method = Method::Smpps;
    auto run = run_events(cfg, b.events);
    // all dues are paid in full here (B >> dues), so proportionality shows as 3:1
    CHECK(miner_total(run, 0) == doctest::Approx(3 * 0.5));
    CHECK(miner_total(run, 1) == doctest::Approx(0.5));
}

TEST_CASE("smpps: pinned-buffer harness pays the B/(-R) fraction per block") {
    EngineConfig cfg;
    cfg.method = Method::Smpps;
    cfg.const_buffer = -500.0;
    SmppsEngine engine(cfg);
    std::vector<PayoutEvent> out;
    ShareEvent ev;
    ev.index = 0;
    ev.miner = 0;
    ev.p_eff = 0.01;
    ev.reward = 50.0;
    engine.step(ev, out);
    CHECK(out.empty()); // no payment until a block
    double due = engine.due_total();
    CHECK(due == doctest::Approx(0.5));
    ev.index = 1;
    ev.is_block = true;
    out.clear();
    engine.step(ev, out);
    // fraction B/(-R) = 50/500 = 0.1 of every due
    double paid = 0.0;
    for (const auto& p : out)
        if (p.recipient != kOperator) paid += p.amount;
    CHECK(paid == doctest::Approx(0.1 * engine.due_total() / 0.9).epsilon(1e-9));
}

TEST_CASE("esmpps: an under-funded block is spent in full on the lowest shares") {
    EngineConfig cfg;
    cfg.method = Method::Esmpps;
    EsmppsEngine engine(cfg);
    std::vector<PayoutEvent> out;
    ShareEvent ev;
    ev.p_eff = 0.02;
    ev.reward = 50.0; // share worth p*B = 1
    ev.index = 0;
    ev.miner = 0;
    engine.step(ev, out);
    ev.index = 1;
    ev.miner = 1;
    ev.is_block = true;
    ev.reward = 0.4; // budget far below the outstanding worth
    engine.step(ev, out);
    double paid = 0.0;
    for (const auto& p : out)
        if (p.recipient != kOperator) paid += p.amount;
    CHECK(paid == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(engine.surplus() == 0.0);
    CHECK(engine.share_fraction(0) < 1.0);
}

TEST_CASE("esmpps: water level arithmetic (0.2, 0.8) + 0.4 -> (0.6, 0.8)") {
    // Exercise the fill through a crafted sequence: two worth-1 shares, one
    // pre-paid to 0.8 via an earlier generous block, then a 0.4-budget block.
    EngineConfig cfg;
    cfg.method = Method::Esmpps;
    EsmppsEngine engine(cfg);
    std::vector<PayoutEvent> out;
    ShareEvent ev;

    // Share 0: worth 1 (p=0.02, B=50), miner 0.
    ev.index = 0;
    ev.miner = 0;
    ev.p_eff = 0.02;
    ev.reward = 50.0;
    engine.step(ev, out);

    // Block by miner 1 with reward 0.8 + epsilon-worth of its own share:
    // its own share worth = 0.02 * 0.8163... keep arithmetic explicit.
    ev.index = 1;
    ev.miner = 1;
    ev.is_block = true;
    ev.reward = 0.8163265306122449; // budget such that share 0 reaches ~0.8
    engine.step(ev, out);
    // share 0 fraction now: budget / (worth0 + worth_block) spread at level 0
    double w_block = 0.02 * ev.reward;
    double level1 = ev.reward / (1.0 + w_block);
    CHECK(engine.share_fraction(0) == doctest::Approx(level1).epsilon(1e-9));

    // Share 2: worth 1, miner 2 (enters at fraction 0).
    out.clear();
    ev.index = 2;
    ev.miner = 2;
    ev.is_block = false;
    ev.reward = 50.0;
    engine.step(ev, out);
    CHECK(engine.share_fraction(2) == doctest::Approx(0.0));

    // Block with budget 0.4-ish: lifts share 2 toward share 0's level but
    // cannot pass it with this budget.
    ev.index = 3;
    ev.miner = 3;
    ev.is_block = true;
    ev.reward = 0.4;
    out.clear();
    engine.step(ev, out);
    CHECK(engine.share_fraction(2) < engine.share_fraction(0) + 1e-12);
    CHECK(engine.share_fraction(2) > 0.3); // most of 0.4 went to the lowest
    CHECK(engine.share_fraction(0) == doctest::Approx(level1).epsilon(1e-9));
}

TEST_CASE("esmpps: ample budget pays every share in full") {
    EventBuilder b;
    b.p = 0.01;
    b.share(0).share(1).block(2); // block brings 50, dues ~1.5
    EngineConfig cfg;
    cfg.method = Method::Esmpps;
    EsmppsEngine engine(cfg);
    std::vector<PayoutEvent> out;
    for (const auto& ev : b.events) engine.step(ev, out);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(engine.share_fraction(i) == doctest::Approx(1.0));
    CHECK(engine.surplus() > 0.0);
    // subsequent shares are paid immediately out of the surplus
    out.clear();
    ShareEvent ev;
    ev.index = 3;
    ev.miner = 0;
    ev.p_eff = 0.01;
    ev.reward = 50.0;
    engine.step(ev, out);
    REQUIRE(out.size() == 1);
    CHECK(out[0].amount == doctest::Approx(0.5));
    CHECK(engine.share_fraction(3) == doctest::Approx(1.0));
}

TEST_CASE("esmpps: water-filling keeps order relative to the pre-block gaps") {
    RngStream rng(74, 0);
    EngineConfig cfg;
    cfg.method = Method::Esmpps;
    EsmppsEngine engine(cfg);
    std::vector<PayoutEvent> out;
    ShareEvent ev;
    ev.p_eff = 0.02;
    ev.reward = 50.0;
    std::size_t n = 0;
    bool ok = true;
    std::vector<double> before;
    for (int i = 0; i < 4000 && ok; ++i) {
        ev.index = i;
        ev.miner = static_cast<MinerId>(i % 3);
        ev.is_block = rng.bernoulli(0.02);
        if (ev.is_block) {
            before.clear();
            for (std::size_t s = 0; s < n; ++s) before.push_back(engine.share_fraction(s));
        }
        out.clear();
        engine.step(ev, out);
        ++n;
        if (ev.is_block) {
            // no share may overtake an earlier one beyond its pre-block lead
            for (std::size_t s = 1; s < before.size(); ++s) {
                double pre_gap = std::max(0.0, before[s] - before[s - 1]);
                double post_gap =
                    engine.share_fraction(s) - engine.share_fraction(s - 1);
                ok &= post_gap <= pre_gap + 1e-9;
            }
            // fractions never decrease
            for (std::size_t s = 0; s < before.size(); ++s)
                ok &= engine.share_fraction(s) >= before[s] - 1e-12;
        }
    }
    CHECK(ok);
}

TEST_CASE("esmpps: newest shares catch up quickly, top levels stagnate") {
    RngStream rng(75, 0);
    EngineConfig cfg;
    cfg.method = Method::Esmpps;
    EsmppsEngine engine(cfg);
    std::vector<PayoutEvent> out;
    ShareEvent ev;
    ev.p_eff = 0.01;
    ev.reward = 45.0; // deliberately under-funded: fractions stay below 1
    int total = 30000;
    for (int i = 0; i < total; ++i) {
        ev.index = i;
        ev.miner = static_cast<MinerId>(i % 2);
        ev.is_block = rng.bernoulli(0.01);
        out.clear();
        engine.step(ev, out);
    }
    // a share from the last 5% has nearly the fraction of the median share
    double late = engine.share_fraction(total - total / 20);
    double mid = engine.share_fraction(total / 2);
    double earliest = engine.share_fraction(10);
    CHECK(late >= 0.0);
    CHECK(mid <= earliest + 1e-9);
    CHECK(earliest <= 1.0);
    // the bulk below the waterline is equalized
    CHECK(late == doctest::Approx(mid).epsilon(0.05));
}
