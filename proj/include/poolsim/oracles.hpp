#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace poolsim::oracle {

// --- numeric utilities -----------------------------------------------------

// Adaptive Simpson quadrature to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10, int max_depth = 60);

// Bracketing root find (bisection/secant hybrid) on [a, b].
double find_root(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, int max_iter = 200);

// --- special functions -----------------------------------------------------

// Exponential integral E1(x) = int_1^inf exp(-x t)/t dt, x > 0.
// Power series below 1, modified Lentz continued fraction above.
double exp_integral_E1(double x);

// f(x) = exp(x) E1(x): expected-payout amplification for a proportional-pool
// share submitted when x*D shares are already in the round. Computed in a
// form that stays finite for large x.
double prop_amplification(double x);

// Root of prop_amplification(x) = 1 (~0.4348182).
double prop_hop_threshold();

// Expected amplification for an optimal hopper over m proportional pools,
// with or without solo fallback once all rounds are older than x0.
double hop_amplification(int m, bool with_fallback);

struct HopTableRow {
    int m;
    double with_fallback;
    double without_fallback;
};
std::vector<HopTableRow> hop_table(int m_max);

// Honest continuous miner's payout fraction under saturating hoppers (= 1 - x0).
double prop_honest_loss();

// --- per-method closed forms ------------------------------------------------

struct PropShareStats {
    double mean;                 // p*B
    double variance;             // -p^2 B^2 (1 + ln p / (1-p))
    double improvement_vs_solo;  // (p B^2) / variance, ~ D/ln D
};
PropShareStats prop_share_variance(double p, double block_reward);

// Reserve needed to keep ruin probability <= delta, and its inverse.
double pps_reserve(double block_reward, double fee, double delta);
double pps_ruin_probability(double block_reward, double fee, double reserve);

struct GeometricStats {
    double mean_per_share;       // (1-f)(1-c) p B
    double variance_per_share;
    double maturity;             // c (1-p), in difficulty units
    double fee_mean_per_block;   // (c + f - c f) B
    double fee_variance_per_block;
};
GeometricStats geometric_stats(double p, double c, double f, double block_reward);

// Average fraction of reward lost after mining for n expected blocks = e^-n n^n / n!.
double mpps_expected_loss(std::uint64_t n);

// Maturity (in blocks) of a pool with constant negative buffer R.
double smpps_maturity(double buffer, double block_reward);

// Reward table f(I, N) for the fixed-reward round-distribution constraints;
// forced to budget * KroneckerDelta(I, N). table[I-1][N-1] valid for I <= N.
std::vector<std::vector<double>> immunity_solve(double p, int n_max, double budget);

// Expected payout amplification (relative to p*B) for a share submitted at
// instantaneous block rate lambda0 when the score-window average rate is
// lambda_bar, with exponential scoring time constant C (seconds).
double fluctuation_amplification(double lambda0, double lambda_bar, double C);

struct LieInWaitOptimum {
    double t_opt;          // seconds
    double amplification;  // 1 + m h / (4 H0)
};
LieInWaitOptimum lie_in_wait_optimum(int m, double h, double network_hashrate,
                                     double t_block);

// Amplification when a miner picks, a posteriori, the highest matched
// difficulty from an increasing menu ending at infinity.
double posterior_difficulty_amplification(const std::vector<double>& difficulties);

} // namespace poolsim::oracle
