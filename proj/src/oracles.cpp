#include "poolsim/oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace poolsim::oracle {

namespace {

constexpr double kEulerGamma = 0.5772156649015328606;

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double m, double fm, double whole,
                     double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double find_root(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (fa * fb > 0)
        throw std::invalid_argument("find_root: interval does not bracket a root");
    for (int i = 0; i < max_iter; ++i) {
        // Secant proposal, clipped into the bracket; fall back to bisection.
        double m = b - fb * (b - a) / (fb - fa);
        if (!(m > std::min(a, b) && m < std::max(a, b)))
            m = 0.5 * (a + b);
        double fmid = f(m);
        if (std::abs(fmid) == 0 || std::abs(b - a) < tol) return m;
        if (fa * fmid < 0) {
            b = m;
            fb = fmid;
        } else {
            a = m;
            fa = fmid;
        }
    }
    return 0.5 * (a + b);
}

double exp_integral_E1(double x) {
    if (!(x > 0))
        throw std::invalid_argument("E1 requires x > 0");
    if (x < 1.0) {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        double sum = 0.0, term = 1.0;
        for (int k = 1; k <= 60; ++k) {
            term *= -x / k;
            double add = -term / k;
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return -kEulerGamma - std::log(x) + sum;
    }
    if (x > 700.0) return 0.0; // exp(-x) underflows
    // Continued fraction E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    return std::exp(-x) * prop_amplification(x);
}

double prop_amplification(double x) {
    if (!(x > 0))
        throw std::invalid_argument("prop_amplification requires x > 0");
    if (x < 1.0) return std::exp(x) * exp_integral_E1(x);
    // Modified Lentz evaluation of exp(x) E1(x); avoids overflow for large x.
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int k = 1; k <= 400; ++k) {
        double ak = -static_cast<double>(k) * static_cast<double>(k);
        b += 2.0;
        d = b + ak * d;
        if (std::abs(d) < tiny) d = tiny;
        c = b + ak / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h;
}

double prop_hop_threshold() {
    return find_root([](double x) { return prop_amplification(x) - 1.0; },
                     0.1, 1.0, 1e-12);
}

double hop_amplification(int m, bool with_fallback) {
    if (m < 1)
        throw std::invalid_argument("hop_amplification requires m >= 1");
    double md = static_cast<double>(m);
    if (!with_fallback) {
        if (m == 1) return 1.0;
        return md * std::log(md) / (md - 1.0);
    }
    double x0 = prop_hop_threshold();
    // Integrand has a log singularity at 0; start just above it, the
    // remainder below eps is O(eps ln(1/eps)).
    const double eps = 1e-12;
    double head =
        integrate([md](double x) { return std::exp(-md * x) * prop_amplification(x); },
                  eps, x0, 1e-9);
    head += eps * (-std::log(eps) + 1.0 - kEulerGamma); // analytic 0..eps remainder
    return md * head + std::exp(-md * x0);
}

std::vector<HopTableRow> hop_table(int m_max) {
    std::vector<HopTableRow> rows;
    for (int m = 1; m <= m_max; ++m)
        rows.push_back({m, hop_amplification(m, true), hop_amplification(m, false)});
    return rows;
}

double prop_honest_loss() {
    double x0 = prop_hop_threshold();
    return 1.0 - x0;
}

PropShareStats prop_share_variance(double p, double block_reward) {
    if (!(p > 0) || !(p < 1))
        throw std::invalid_argument("p must be in (0, 1)");
    PropShareStats s;
    double b2 = block_reward * block_reward;
    s.mean = p * block_reward;
    s.variance = -p * p * b2 * (1.0 + std::log(p) / (1.0 - p));
    s.improvement_vs_solo = (p * b2) / s.variance;
    return s;
}

double pps_reserve(double block_reward, double fee, double delta) {
    if (!(fee > 0) || !(fee < 1))
        throw std::invalid_argument("fee must be in (0, 1)");
    if (!(delta > 0) || !(delta < 1))
        throw std::invalid_argument("delta must be in (0, 1)");
    return block_reward * std::log(1.0 / delta) / (2.0 * fee);
}

double pps_ruin_probability(double block_reward, double fee, double reserve) {
    if (!(fee > 0) || !(fee < 1))
        throw std::invalid_argument("fee must be in (0, 1)");
    if (reserve < 0)
        throw std::invalid_argument("reserve must be nonnegative");
    return std::exp(-2.0 * fee * reserve / block_reward);
}

GeometricStats geometric_stats(double p, double c, double f, double block_reward) {
    if (!(p > 0) || !(p < 1))
        throw std::invalid_argument("p must be in (0, 1)");
    if (!(c > 0) || !(c < 1))
        throw std::invalid_argument("c must be in (0, 1)");
    if (!(f < 1))
        throw std::invalid_argument("f must be < 1");
    GeometricStats g;
    double B = block_reward;
    double omc = 1.0 - c, omf = 1.0 - f, omp = 1.0 - p;
    double denom = p + c * (2.0 - c) * omp;
    g.mean_per_share = omf * omc * p * B;
    g.variance_per_share = std::pow(omc, 4) * omf * omf * omp * p * p * B * B / denom;
    g.maturity = c * omp;
    g.fee_mean_per_block = (c + f - c * f) * B;
    g.fee_variance_per_block = omc * omc * omf * omf * omp * c * c * B * B / denom;
    return g;
}

double mpps_expected_loss(std::uint64_t n) {
    if (n < 1)
        throw std::invalid_argument("n must be >= 1");
    double nd = static_cast<double>(n);
    return std::exp(-nd + nd * std::log(nd) - std::lgamma(nd + 1.0));
}

double smpps_maturity(double buffer, double block_reward) {
    if (!(buffer < 0))
        throw std::invalid_argument("maturity is defined for negative buffers");
    return -buffer / block_reward;
}

std::vector<std::vector<double>> immunity_solve(double p, int n_max, double budget) {
    if (!(p > 0) || !(p < 1))
        throw std::invalid_argument("p must be in (0, 1)");
    if (n_max < 1 || n_max > 12)
        throw std::invalid_argument("n_max must be in [1, 12]");
    // table[i-1][n-1] = reward of the i-th share in a round of n shares.
    std::vector<std::vector<double>> table(n_max, std::vector<double>(n_max, 0.0));
    const double tol = 1e-12 * std::abs(budget);
    for (int i = 1; i <= n_max; ++i) {
        // Fixed-reward constraint for round length N = i: shares before i are
        // already solved, the i-th takes the remainder.
        double used = 0.0;
        for (int j = 1; j < i; ++j) used += table[j - 1][i - 1];
        double diag = budget - used;
        table[i - 1][i - 1] = diag;
        // Expected-value constraint for share index i: the tail over N > i
        // must carry whatever expectation remains; with nonnegative rewards a
        // zero remainder forces the whole tail to zero.
        double remainder = p * budget - p * diag;
        if (remainder < -tol)
            throw std::runtime_error("immunity_solve: infeasible constraint system");
        if (remainder > tol)
            throw std::runtime_error("immunity_solve: nonzero tail contradicts nonnegativity");
        for (int n = i + 1; n <= n_max; ++n) table[i - 1][n - 1] = 0.0;
    }
    return table;
}

double fluctuation_amplification(double lambda0, double lambda_bar, double C) {
    if (!(lambda0 > 0) || !(lambda_bar > 0) || !(C > 0))
        throw std::invalid_argument("rates and window must be positive");
    // In units tau = T/C only a = C*lambda0 and b = C*lambda_bar matter:
    //   amp = int_0^inf a exp(-a tau) / (b + a (exp(tau) - 1)) dtau
    double a = C * lambda0;
    double b = C * lambda_bar;
    auto integrand = [a, b](double tau) {
        if (tau > 690.0) return 0.0; // denominator overflows; integrand is 0
        double denom = b + a * std::expm1(tau);
        return a * std::exp(-a * tau) / denom;
    };
    // exp(-a tau) and the growing denominator kill the tail.
    double tail = std::min(45.0 / a + 45.0, 690.0);
    double result = integrate(integrand, 0.0, tail, 1e-10);
    if (!std::isfinite(result))
        throw std::runtime_error("fluctuation_amplification: quadrature diverged");
    return result;
}

LieInWaitOptimum lie_in_wait_optimum(int m, double h, double network_hashrate,
                                     double t_block) {
    if (m < 1)
        throw std::invalid_argument("m must be >= 1");
    LieInWaitOptimum o;
    double md = static_cast<double>(m);
    o.t_opt = (md - 1.0) / (2.0 * md - 1.0) * t_block;
    o.amplification = 1.0 + md * h / (4.0 * network_hashrate);
    return o;
}

double posterior_difficulty_amplification(const std::vector<double>& difficulties) {
    if (difficulties.size() < 2)
        throw std::invalid_argument("need at least one finite difficulty plus infinity");
    if (!std::isinf(difficulties.back()))
        throw std::invalid_argument("difficulty menu must end at infinity");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < difficulties.size(); ++i) {
        if (!(difficulties[i] > 0) || !(difficulties[i] < difficulties[i + 1]))
            throw std::invalid_argument("difficulty menu must be strictly increasing");
        sum += 1.0 - difficulties[i] / difficulties[i + 1];
    }
    return sum;
}

} // namespace poolsim::oracle
