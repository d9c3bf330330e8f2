#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "poolsim/rng.hpp"
#include "poolsim/schedule.hpp"
#include "poolsim/stats.hpp"
#include "poolsim/stream.hpp"

using namespace poolsim;

TEST_CASE("expected blocks and solo stats match the worked example") {
    // 1 Ghash/s for a day at difficulty 1690906, 50 BTC per block.
    double lambda = expected_blocks(1e9, 86400.0, 1690906.0);
    CHECK(lambda == doctest::Approx(0.0119).epsilon(0.01));
    CHECK(lambda * 50.0 == doctest::Approx(0.595).epsilon(0.01));

    auto s = solo_payout_stats(1e9, 86400.0, 1690906.0, 50.0);
    CHECK(s.variance_btc2 == doctest::Approx(29.75).epsilon(0.01));
    CHECK(std::sqrt(s.variance_btc2) == doctest::Approx(5.454).epsilon(0.01));
    CHECK(s.rel_stddev == doctest::Approx(9.17).epsilon(0.01)); // 917%
    CHECK(s.p_any_payment == doctest::Approx(0.0118).epsilon(0.02));

    CHECK(expected_blocks(0.0, 86400.0, 1690906.0) == 0.0);
    CHECK_THROWS_AS(expected_blocks(1e9, 86400.0, 0.5), std::invalid_argument);

    // Large lambda: relative spread vanishes.
    auto big = solo_payout_stats(1e15, 1e9, 1000.0, 50.0);
    CHECK(big.rel_stddev < 1e-3);
}

TEST_CASE("pmf values") {
    CHECK(pmf_poisson(1.0, 0) == doctest::Approx(0.3679).epsilon(1e-3));
    CHECK(pmf_poisson(1.0, 1) == doctest::Approx(0.3679).epsilon(1e-3));
    CHECK(pmf_poisson(1.0, 2) == doctest::Approx(0.1839).epsilon(1e-3));
    CHECK(pmf_poisson(1.0, 3) == doctest::Approx(0.0613).epsilon(1e-3));
    CHECK(pmf_geometric(0.25, 1) == doctest::Approx(0.25));
    CHECK(pmf_geometric(0.25, 3) == doctest::Approx(0.25 * 0.75 * 0.75));
    CHECK_THROWS_AS(pmf_poisson(-1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(pmf_geometric(0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(pmf_geometric(0.5, 0), std::invalid_argument);
}

TEST_CASE("poisson pmf sums to one over the recommended span") {
    for (double lambda : {0.5, 1.0, 7.0, 40.0, 300.0}) {
        std::uint64_t k_max =
            static_cast<std::uint64_t>(lambda + 20.0 * std::sqrt(lambda) + 50.0);
        KahanSum sum;
        for (std::uint64_t k = 0; k <= k_max; ++k) sum.add(pmf_poisson(lambda, k));
        CHECK(std::abs(sum.value() - 1.0) < 1e-12);
    }
}

TEST_CASE("rng streams are deterministic and disjoint") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
        all_equal &= (x == y);
        any_diff |= (x != z);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("draw_share hits its probability within binomial error") {
    RngStream rng(1, 0);
    const int n = 1000000;
    const double p = 0.01;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += draw_share(rng, p) ? 1 : 0;
    double frac = static_cast<double>(hits) / n;
    double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(frac - p) < 3 * se);

    RngStream sure(1, 1);
    for (int i = 0; i < 100; ++i) CHECK(draw_share(sure, 1.0));
    CHECK_THROWS_AS(draw_share(rng, 0.0), std::invalid_argument);
}

TEST_CASE("schedules enforce segment ordering and lookup") {
    CHECK_THROWS_AS(StepSchedule({{5, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(StepSchedule({{0, 1.0}, {0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(DifficultySchedule(StepSchedule({{0, 0.5}})), std::invalid_argument);
    CHECK_THROWS_AS(RewardSchedule(StepSchedule({{0, -1.0}})), std::invalid_argument);

    DifficultySchedule d(StepSchedule({{0, 100.0}, {1000, 200.0}}));
    CHECK(d.p_at(0) == doctest::Approx(0.01));
    CHECK(d.p_at(999) == doctest::Approx(0.01));
    CHECK(d.p_at(1000) == doctest::Approx(0.005));
}

TEST_CASE("stream generation: attribution, block rate, determinism") {
    DifficultySchedule diff(StepSchedule::constant(100.0));
    RewardSchedule rew(StepSchedule::constant(50.0));

    SUBCASE("single miner gets every share") {
        auto events = generate_stream(RngStream(3, 0), diff, rew, {{7, 1.0, 1.0}}, 5);
        REQUIRE(events.size() == 5);
        for (const auto& ev : events) {
            CHECK(ev.miner == 7);
            CHECK(ev.p_eff == doctest::Approx(0.01));
            CHECK(ev.reward == doctest::Approx(50.0));
        }
        CHECK(events[4].index == 4);
    }

    SUBCASE("weighted attribution 3:1 lands within binomial error") {
        const std::uint64_t n = 1000000;
        StreamGenerator gen(RngStream(4, 0), diff, rew, {{0, 3.0, 1.0}, {1, 1.0, 1.0}});
        std::uint64_t first = 0;
        for (std::uint64_t i = 0; i < n; ++i)
            if (gen.next().miner == 0) ++first;
        double frac = static_cast<double>(first) / n;
        double se = std::sqrt(0.75 * 0.25 / n);
        CHECK(std::abs(frac - 0.75) < 3 * se);
    }

    SUBCASE("block fraction within 4 binomial standard errors") {
        const std::uint64_t n = 1000000;
        StreamGenerator gen(RngStream(5, 1), diff, rew, {{0, 1.0, 1.0}});
        std::uint64_t blocks = 0;
        std::uint64_t round_len = 0;
        RunningStats rounds;
        for (std::uint64_t i = 0; i < n; ++i) {
            ++round_len;
            if (gen.next().is_block) {
                ++blocks;
                rounds.add(static_cast<double>(round_len));
                round_len = 0;
            }
        }
        double p = 0.01;
        double frac = static_cast<double>(blocks) / n;
        CHECK(std::abs(frac - p) < 4 * std::sqrt(p * (1 - p) / n));
        // Mean round length tracks D.
        CHECK(std::abs(rounds.mean() - 100.0) < 3 * rounds.stderr_mean());
    }

    SUBCASE("schedule switch changes p_eff exactly at the boundary") {
        DifficultySchedule sw(StepSchedule({{0, 100.0}, {3, 200.0}}));
        auto events = generate_stream(RngStream(6, 0), sw, rew, {{0, 1.0, 1.0}}, 6);
        CHECK(events[2].p_eff == doctest::Approx(0.01));
        CHECK(events[3].p_eff == doctest::Approx(0.005));
    }

    SUBCASE("identical seed and stream reproduce the identical sequence") {
        auto a = generate_stream(RngStream(9, 2), diff, rew, {{0, 2.0, 1.0}, {1, 1.0, 1.0}}, 5000);
        auto b = generate_stream(RngStream(9, 2), diff, rew, {{0, 2.0, 1.0}, {1, 1.0, 1.0}}, 5000);
        REQUIRE(a.size() == b.size());
        bool same = true;
        for (std::size_t i = 0; i < a.size(); ++i)
            same &= a[i].miner == b[i].miner && a[i].is_block == b[i].is_block;
        CHECK(same);
    }

    CHECK_THROWS_AS(StreamGenerator(RngStream(1, 0), diff, rew, {}), std::invalid_argument);
}

TEST_CASE("replay log round-trips and reports bad rows by line") {
    DifficultySchedule diff(StepSchedule::constant(50.0));
    RewardSchedule rew(StepSchedule::constant(25.0));
    auto events = generate_stream(RngStream(11, 0), diff, rew, {{0, 1.0, 1.0}, {1, 2.0, 2.0}}, 500);

    std::ostringstream out;
    write_replay_log(out, events);
    std::istringstream in(out.str());
    auto back = read_replay_log(in);
    REQUIRE(back.size() == events.size());
    bool same = true;
    for (std::size_t i = 0; i < events.size(); ++i) {
        same &= back[i].index == events[i].index && back[i].miner == events[i].miner &&
                back[i].d == events[i].d && back[i].p_eff == events[i].p_eff &&
                back[i].reward == events[i].reward && back[i].is_block == events[i].is_block;
    }
    CHECK(same);

    std::istringstream bad("index,miner,d,p_eff,B,is_block\n0,0,1,0.01,50,0\nnot-a-row\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(read_replay_log(bad)),
                         doctest::Contains("line 3"), std::runtime_error);
}

TEST_CASE("chi-square p-value sanity") {
    CHECK(chi_square_pvalue(0.0, 1) == doctest::Approx(1.0));
    // chi2 = 3.841 at 1 dof is the 5% critical value
    CHECK(chi_square_pvalue(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi_square_pvalue(6.635, 1) == doctest::Approx(0.01).epsilon(0.01));
}
