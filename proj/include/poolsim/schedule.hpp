#pragma once

#include <cstdint>
#include <vector>

namespace poolsim {

// Piecewise-constant schedule keyed by global share index. Difficulty and
// block-reward schedules share the same segment machinery.
struct ScheduleSegment {
    std::uint64_t start; // first share index of the segment
    double value;
};

class StepSchedule {
public:
    StepSchedule() = default;
    explicit StepSchedule(std::vector<ScheduleSegment> segments);

    double at(std::uint64_t index) const;
    const std::vector<ScheduleSegment>& segments() const { return segments_; }

    static StepSchedule constant(double value) { return StepSchedule({{0, value}}); }

private:
    std::vector<ScheduleSegment> segments_;
};

// Network difficulty per share index. D >= 1; p = 1/D.
class DifficultySchedule {
public:
    DifficultySchedule() : DifficultySchedule(StepSchedule::constant(1.0)) {}
    explicit DifficultySchedule(StepSchedule sched);

    double difficulty_at(std::uint64_t index) const { return sched_.at(index); }
    double p_at(std::uint64_t index) const { return 1.0 / sched_.at(index); }
    const StepSchedule& schedule() const { return sched_; }

private:
    StepSchedule sched_;
};

// Block reward (BTC) per share index. B >= 0.
class RewardSchedule {
public:
    RewardSchedule() : RewardSchedule(StepSchedule::constant(50.0)) {}
    explicit RewardSchedule(StepSchedule sched);

    double reward_at(std::uint64_t index) const { return sched_.at(index); }
    const StepSchedule& schedule() const { return sched_; }

private:
    StepSchedule sched_;
};

} // namespace poolsim
