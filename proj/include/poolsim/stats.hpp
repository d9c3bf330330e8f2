#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace poolsim {

// P(K = k) for K ~ Poisson(lambda).
double pmf_poisson(double lambda, std::uint64_t k);

// P(N = n) for N ~ Geometric(p) on {1, 2, ...}.
double pmf_geometric(double p, std::uint64_t n);

// Compensated (Kahan/Neumaier) summation; keeps ledger residuals near
// machine epsilon over hundreds of millions of additions.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }
    void reset() { sum_ = comp_ = 0.0; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Streaming mean/variance (Welford).
class RunningStats {
public:
    void add(double x);
    std::size_t count() const { return n_; }
    double mean() const;
    double variance() const; // unbiased sample variance
    double stddev() const;
    double stderr_mean() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct Estimate {
    double value = 0.0;
    double half_width_95 = 0.0; // 95% confidence half-width
    std::size_t n = 0;
};

// Mean with normal-approximation 95% CI across independent samples.
Estimate estimate_mean(const std::vector<double>& samples);

// Upper-tail p-value of the chi-square distribution with k degrees of
// freedom (regularized upper incomplete gamma Q(k/2, x/2)).
double chi_square_pvalue(double statistic, int dof);

} // namespace poolsim
