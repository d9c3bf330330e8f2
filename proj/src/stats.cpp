#include "poolsim/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace poolsim {

double pmf_poisson(double lambda, std::uint64_t k) {
    if (lambda < 0)
        throw std::invalid_argument("poisson rate must be nonnegative");
    if (lambda == 0) return k == 0 ? 1.0 : 0.0;
    double kd = static_cast<double>(k);
    return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0));
}

double pmf_geometric(double p, std::uint64_t n) {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("geometric parameter must be in (0, 1]");
    if (n < 1)
        throw std::invalid_argument("geometric support starts at 1");
    return p * std::pow(1.0 - p, static_cast<double>(n - 1));
}

void RunningStats::add(double x) {
    ++n_;
    double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double RunningStats::mean() const { return mean_; }

double RunningStats::variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::stddev() const { return std::sqrt(variance()); }

double RunningStats::stderr_mean() const {
    return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
}

Estimate estimate_mean(const std::vector<double>& samples) {
    RunningStats rs;
    for (double x : samples) rs.add(x);
    Estimate e;
    e.n = rs.count();
    e.value = rs.mean();
    e.half_width_95 = 1.959963984540054 * rs.stderr_mean();
    return e;
}

namespace {

// Regularized upper incomplete gamma Q(a, x) via series / continued fraction
// (Numerical Recipes style).
double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q domain");
    if (x == 0) return 1.0;
    if (x < a + 1.0) {
        // P(a,x) by series, return 1 - P.
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // Q(a,x) by Lentz continued fraction.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double chi_square_pvalue(double statistic, int dof) {
    if (dof < 1) throw std::invalid_argument("chi-square dof must be >= 1");
    if (statistic <= 0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * statistic);
}

} // namespace poolsim
