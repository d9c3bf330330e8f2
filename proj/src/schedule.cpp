#include "poolsim/schedule.hpp"

#include <stdexcept>

namespace poolsim {

StepSchedule::StepSchedule(std::vector<ScheduleSegment> segments)
    : segments_(std::move(segments)) {
    if (segments_.empty())
        throw std::invalid_argument("schedule needs at least one segment");
    if (segments_.front().start != 0)
        throw std::invalid_argument("first schedule segment must start at index 0");
    for (std::size_t i = 1; i < segments_.size(); ++i) {
        if (segments_[i].start <= segments_[i - 1].start)
            throw std::invalid_argument("schedule segments must be strictly ordered by start index");
    }
}

double StepSchedule::at(std::uint64_t index) const {
    // Linear scan from the back; schedules have a handful of segments.
    for (std::size_t i = segments_.size(); i-- > 0;) {
        if (index >= segments_[i].start) return segments_[i].value;
    }
    return segments_.front().value;
}

DifficultySchedule::DifficultySchedule(StepSchedule sched) : sched_(std::move(sched)) {
    for (const auto& seg : sched_.segments()) {
        if (seg.value < 1.0)
            throw std::invalid_argument("difficulty must be >= 1");
    }
}

RewardSchedule::RewardSchedule(StepSchedule sched) : sched_(std::move(sched)) {
    for (const auto& seg : sched_.segments()) {
        if (seg.value < 0.0)
            throw std::invalid_argument("block reward must be nonnegative");
    }
}

} // namespace poolsim
