#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "poolsim/oracles.hpp"
#include "poolsim/stats.hpp"

using namespace poolsim;
namespace oc = poolsim::oracle;

namespace {
constexpr double kEulerGamma = 0.5772156649015328606;

// Independent E1 oracle: tanh-sinh-free brute quadrature of
// int_1^inf exp(-x t)/t dt via the substitution t = 1 + u/(1-u), u in (0,1).
double e1_quadrature(double x) {
    return oc::integrate(
        [x](double u) {
            double t = 1.0 + u / (1.0 - u);
            double jac = 1.0 / ((1.0 - u) * (1.0 - u));
            return std::exp(-x * t) / t * jac;
        },
        0.0, 0.999999, 1e-13, 70);
}
} // namespace

TEST_CASE("E1: series/continued-fraction vs independent quadrature") {
    // Frozen from the quadrature oracle (and classical tables): E1(1).
    CHECK(oc::exp_integral_E1(1.0) == doctest::Approx(0.21938393439552028).epsilon(1e-9));
    for (double x : {0.01, 0.1, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0, 10.0, 30.0}) {
        double ref = e1_quadrature(x);
        CHECK(oc::exp_integral_E1(x) == doctest::Approx(ref).epsilon(1e-9));
    }
    CHECK_THROWS_AS(oc::exp_integral_E1(0.0), std::invalid_argument);
    CHECK_THROWS_AS(oc::exp_integral_E1(-1.0), std::invalid_argument);
}

TEST_CASE("amplification asymptotes anchor both regimes") {
    // Small x: f(x) ~ -ln x - gamma.
    for (double x : {1e-8, 1e-6, 1e-4}) {
        double f = oc::prop_amplification(x);
        CHECK(f == doctest::Approx(-std::log(x) - kEulerGamma).epsilon(1e-3));
    }
    // Large x: f(x) ~ 1/(x+1).
    for (double x : {50.0, 200.0, 1000.0}) {
        double f = oc::prop_amplification(x);
        CHECK(f == doctest::Approx(1.0 / (x + 1.0)).epsilon(2e-2));
    }
    // Monotonically decreasing on a grid.
    double prev = oc::prop_amplification(0.01);
    for (double x = 0.05; x < 20.0; x += 0.05) {
        double f = oc::prop_amplification(x);
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("hop threshold x0") {
    double x0 = oc::prop_hop_threshold();
    CHECK(x0 == doctest::Approx(0.4348182).epsilon(1e-6));
    CHECK(oc::prop_amplification(x0) == doctest::Approx(1.0).epsilon(1e-8));
    // Dual-route root find: plain bisection must agree.
    double lo = 0.1, hi = 1.0;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (oc::prop_amplification(mid) - 1.0 > 0)
            lo = mid;
        else
            hi = mid;
    }
    CHECK(x0 == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
}

TEST_CASE("hop amplification reproduces the published table") {
    struct Row {
        int m;
        double with_fb, without_fb;
    };
    const Row rows[] = {
        {1, 1.28149, 1.0},    {2, 1.5159, 1.38629},  {3, 1.71404, 1.64792},
        {4, 1.88393, 1.84839},{5, 2.03152, 2.0118},  {6, 2.16131, 2.15011},
        {7, 2.27669, 2.27023},{8, 2.38028, 2.3765},  {9, 2.4741, 2.47188},
        {10, 2.55975, 2.55843},{15, 2.90159, 2.90148},{20, 3.15341, 3.1534},
        {25, 3.353, 3.353},
    };
    for (const auto& row : rows) {
        CHECK(std::abs(oc::hop_amplification(row.m, true) - row.with_fb) < 1e-3);
        CHECK(std::abs(oc::hop_amplification(row.m, false) - row.without_fb) < 1e-3);
    }
    // Closed form vs quadrature for the no-fallback strategy.
    for (int m : {2, 5, 10}) {
        double md = m;
        double quad = md * oc::integrate(
                               [md](double x) {
                                   return std::exp(-md * x) * oc::prop_amplification(x);
                               },
                               1e-12, 30.0 / md, 1e-10) +
                      1e-12; // the head below 1e-12 is negligible at this tolerance
        CHECK(quad == doctest::Approx(md * std::log(md) / (md - 1.0)).epsilon(1e-5));
    }
    // Fallback dominates, and the gap closes as m grows.
    double prev_gap = 1.0;
    for (int m : {1, 2, 5, 10, 20}) {
        double gap = oc::hop_amplification(m, true) - oc::hop_amplification(m, false);
        CHECK(gap >= -1e-9);
        CHECK(gap <= prev_gap + 1e-9);
        prev_gap = gap;
    }
    CHECK_THROWS_AS(oc::hop_amplification(0, true), std::invalid_argument);
}

TEST_CASE("honest-miner payout under saturating hoppers") {
    double loss = oc::prop_honest_loss();
    CHECK(loss == doctest::Approx(0.56518).epsilon(1e-4));
    // Identity: the direct integral agrees with 1 - x0.
    double x0 = oc::prop_hop_threshold();
    double integral = oc::integrate(
        [x0](double x) { return x * std::exp(-x) / (x + x0); }, 0.0, 60.0, 1e-9);
    CHECK(integral == doctest::Approx(loss).epsilon(1e-6));
    CHECK(1.0 - loss == doctest::Approx(x0).epsilon(1e-9));
}

TEST_CASE("proportional share variance and the series oracle") {
    // Direct series summation of E[w^2] - E[w]^2 with Pr(N) = N p^2 (1-p)^(N-1).
    double p = 0.01, B = 50.0;
    KahanSum ew, ew2;
    for (int n = 1; n < 20000; ++n) {
        double pr = n * p * p * std::pow(1.0 - p, n - 1);
        ew.add(pr * B / n);
        ew2.add(pr * (B / n) * (B / n));
    }
    double var_series = ew2.value() - ew.value() * ew.value();
    auto s = oc::prop_share_variance(p, B);
    CHECK(s.mean == doctest::Approx(p * B).epsilon(1e-12));
    CHECK(ew.value() == doctest::Approx(p * B).epsilon(1e-6));
    CHECK(s.variance == doctest::Approx(var_series).epsilon(1e-8));

    // Worked example: D = 1.5e6 gives ~1.13e5 improvement over solo.
    auto big = oc::prop_share_variance(1.0 / 1.5e6, B);
    CHECK(big.improvement_vs_solo == doctest::Approx(1.13e5).epsilon(0.01));
}

TEST_CASE("pps reserve and ruin probability are inverse") {
    CHECK(oc::pps_reserve(50.0, 0.05, 0.001) == doctest::Approx(3454.0).epsilon(1e-3));
    CHECK(std::round(oc::pps_reserve(50.0, 0.05, 0.001)) == 3454.0);
    CHECK(oc::pps_ruin_probability(50.0, 0.01, 500.0) == doctest::Approx(0.819).epsilon(1e-3));
    for (double delta : {0.5, 0.1, 0.001}) {
        double r = oc::pps_reserve(50.0, 0.03, delta);
        CHECK(oc::pps_ruin_probability(50.0, 0.03, r) == doctest::Approx(delta).epsilon(1e-12));
    }
    CHECK_THROWS_AS(oc::pps_reserve(50.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("geometric closed forms") {
    double p = 0.01, c = 0.1, f = 0.0, B = 50.0;
    auto g = oc::geometric_stats(p, c, f, B);
    CHECK(g.mean_per_share == doctest::Approx((1 - f) * (1 - c) * p * B));
    CHECK(g.mean_per_share == doctest::Approx(0.45));
    CHECK(g.maturity == doctest::Approx(c * (1 - p)));
    CHECK(g.fee_mean_per_block == doctest::Approx((c + f - c * f) * B));

    // Small c, f: variance ~ (pB)^2 / (p + 2c).
    auto small = oc::geometric_stats(0.001, 0.01, 0.0, B);
    double approx = (0.001 * B) * (0.001 * B) / (0.001 + 2 * 0.01);
    CHECK(small.variance_per_share == doctest::Approx(approx).epsilon(0.03));

    // c -> 0: variance approaches the solo per-share variance p(1-p)B^2.
    auto solo = oc::geometric_stats(0.01, 1e-7, 0.0, B);
    CHECK(solo.variance_per_share ==
          doctest::Approx(0.01 * 0.99 * B * B).epsilon(1e-3));

    // c -> 1: variance collapses.
    auto pps_like = oc::geometric_stats(0.01, 0.999999, 0.0, B);
    CHECK(pps_like.variance_per_share < 1e-9);

    CHECK_THROWS_AS(oc::geometric_stats(0.01, 0.0, 0.0, B), std::invalid_argument);
}

TEST_CASE("mpps loss and smpps maturity") {
    CHECK(oc::mpps_expected_loss(10) == doctest::Approx(0.12511).epsilon(1e-3));
    CHECK(oc::mpps_expected_loss(10) == doctest::Approx(1.0 / std::sqrt(2 * M_PI * 10)).epsilon(0.01));
    // n = 1: direct Poisson series for E[min(n, L)].
    KahanSum emin;
    for (int l = 0; l < 200; ++l)
        emin.add(pmf_poisson(1.0, l) * std::min(1, l));
    CHECK(oc::mpps_expected_loss(1) == doctest::Approx(1.0 - emin.value()).epsilon(1e-10));
    CHECK(oc::mpps_expected_loss(1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    CHECK(oc::smpps_maturity(-500.0, 50.0) == doctest::Approx(10.0));
    CHECK_THROWS_AS(oc::smpps_maturity(10.0, 50.0), std::invalid_argument);
}

TEST_CASE("round-reward immunity: only the last share can be paid") {
    for (double p : {0.1, 0.5, 0.9}) {
        for (int n_max : {1, 3, 8, 12}) {
            auto table = oc::immunity_solve(p, n_max, 1.0);
            for (int i = 1; i <= n_max; ++i) {
                for (int n = i; n <= n_max; ++n) {
                    double expect = i == n ? 1.0 : 0.0;
                    CHECK(table[i - 1][n - 1] == doctest::Approx(expect).epsilon(1e-12));
                }
            }
            // Column sums: the fixed reward is fully distributed.
            for (int n = 1; n <= n_max; ++n) {
                double sum = 0.0;
                for (int i = 1; i <= n; ++i) sum += table[i - 1][n - 1];
                CHECK(sum == doctest::Approx(1.0));
            }
            // Expectation constraint with the analytic geometric tail.
            for (int i = 1; i <= n_max; ++i) {
                double e = 0.0;
                for (int n = i; n <= n_max; ++n)
                    e += p * std::pow(1 - p, n - i) * table[i - 1][n - 1];
                CHECK(e == doctest::Approx(p).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(oc::immunity_solve(0.5, 13, 1.0), std::invalid_argument);
}

TEST_CASE("hashrate-fluctuation amplification") {
    // Instant-block limit with window age x0 reduces to the fair threshold.
    double x0 = oc::prop_hop_threshold();
    CHECK(oc::fluctuation_amplification(2e4, x0, 1.0) == doctest::Approx(1.0).epsilon(2e-3));
    // Instant-block limit at a general window age reduces to f(C*lambda_bar).
    for (double b : {0.2, 1.0, 2.0})
        CHECK(oc::fluctuation_amplification(2e4, b, 1.0) ==
              doctest::Approx(oc::prop_amplification(b)).epsilon(2e-3));
    // Equal rates: closed form 1/(1 + C*lambda).
    for (double a : {0.5, 1.0, 5.0})
        CHECK(oc::fluctuation_amplification(a, a, 1.0) ==
              doctest::Approx(1.0 / (1.0 + a)).epsilon(1e-6));
    // Vanishing current rate: amplification ~ (l0/lb) ln(lb/l0).
    double l0 = 1e-4, lb = 1.0;
    double expect = l0 / lb * std::log(lb / l0);
    CHECK(oc::fluctuation_amplification(l0, lb, 1.0) == doctest::Approx(expect).epsilon(0.15));
    CHECK_THROWS_AS(oc::fluctuation_amplification(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("lie-in-wait optimum") {
    auto one = oc::lie_in_wait_optimum(1, 1.0, 100.0, 600.0);
    CHECK(one.t_opt == doctest::Approx(0.0));
    CHECK(one.amplification == doctest::Approx(1.0 + 1.0 / 400.0));
    auto three = oc::lie_in_wait_optimum(3, 1.0, 100.0, 600.0);
    CHECK(three.t_opt == doctest::Approx(240.0));
    auto huge = oc::lie_in_wait_optimum(100000, 1.0, 1e6, 600.0);
    CHECK(huge.t_opt == doctest::Approx(300.0).epsilon(1e-4)); // -> T0/2
}

TEST_CASE("posterior difficulty choice amplification") {
    double inf = std::numeric_limits<double>::infinity();
    CHECK(oc::posterior_difficulty_amplification({1.0, 2.0, inf}) == doctest::Approx(1.5));
    CHECK(oc::posterior_difficulty_amplification({1.0, inf}) == doctest::Approx(1.0));
    CHECK(oc::posterior_difficulty_amplification({1.0, 2.0, 4.0, inf}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(oc::posterior_difficulty_amplification({2.0, 1.0, inf}),
                    std::invalid_argument);
    CHECK_THROWS_AS(oc::posterior_difficulty_amplification({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("quadrature results are stable under tolerance halving") {
    auto f = [](double x) { return std::exp(-2.0 * x) * oc::prop_amplification(x + 1e-9); };
    double a = oc::integrate(f, 1e-9, 15.0, 1e-6);
    double b = oc::integrate(f, 1e-9, 15.0, 5e-7);
    CHECK(std::abs(a - b) < 1e-5);
    double c = oc::hop_amplification(5, true);
    CHECK(std::abs(c - oc::hop_amplification(5, true)) == 0.0);
}
