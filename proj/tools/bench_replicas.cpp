// Compares the serial reference path against OpenMP-parallel replicas and
// checks that both produce identical summaries.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "poolsim/presets.hpp"
#include "poolsim/simulator.hpp"

using Clock = std::chrono::steady_clock;

static double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int main(int argc, char** argv) {
    std::uint64_t horizon = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 400000;
    int replicas = argc > 2 ? std::atoi(argv[2]) : 8;

    poolsim::ScenarioConfig cfg = poolsim::scenario_geometric_fairness();
    cfg.horizon_shares = horizon;
    cfg.replicas = replicas;

    std::printf("scenario: geometric pool, %d replicas x %llu shares\n", replicas,
                static_cast<unsigned long long>(horizon));

    auto t0 = Clock::now();
    auto serial = poolsim::run_scenario(cfg, /*parallel=*/false);
    double t_serial = seconds_since(t0);

    t0 = Clock::now();
    auto parallel = poolsim::run_scenario(cfg, /*parallel=*/true);
    double t_parallel = seconds_since(t0);

    bool identical = serial.replicas.size() == parallel.replicas.size();
    for (std::size_t r = 0; identical && r < serial.replicas.size(); ++r) {
        const auto& a = serial.replicas[r];
        const auto& b = parallel.replicas[r];
        for (std::size_t m = 0; m < a.miner_payout.size(); ++m)
            identical &= a.miner_payout[m] == b.miner_payout[m];
        identical &= a.events == b.events;
    }

    std::printf("serial reference: %8.3f s (%.1f Mevents/s)\n", t_serial,
                replicas * horizon / t_serial / 1e6);
    std::printf("openmp parallel:  %8.3f s (%.1f Mevents/s, %d threads)\n", t_parallel,
                replicas * horizon / t_parallel / 1e6, poolsim::effective_thread_cap());
    std::printf("speedup: %.2fx, results byte-identical: %s\n", t_serial / t_parallel,
                identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
