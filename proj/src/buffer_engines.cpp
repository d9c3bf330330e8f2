#include "poolsim/buffer_engines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poolsim {

// --- MPPS --------------------------------------------------------------------

MppsEngine::MppsEngine(const EngineConfig& cfg) : fee_(cfg.fee) {}

void MppsEngine::release(MinerId m, std::int64_t cause, std::uint64_t at,
                         std::vector<PayoutEvent>& out) {
    double target = std::min(pps_.get(m), prop_.get(m));
    double delta = target - paid_.get(m);
    if (delta > 0) {
        out.push_back({m, delta, cause, at});
        paid_.at(m) = target;
    }
}

void MppsEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    pps_.at(ev.miner) += (1.0 - fee_) * ev.p_eff * ev.reward;
    round_counts_.at(ev.miner) += ev.d;
    round_total_ += ev.d;
    if (!ev.is_block) {
        release(ev.miner, kImmediate, ev.index, out);
        return;
    }
    // Credit proportional balances for the round, take the fee, then release
    // whatever the min rule newly allows for anyone.
    double budget = (1.0 - fee_) * ev.reward;
    for (std::size_t k = 0; k < round_counts_.size(); ++k)
        if (round_counts_[k] > 0)
            prop_.at(static_cast<MinerId>(k)) += budget * round_counts_[k] / round_total_;
    round_counts_.clear();
    round_total_ = 0.0;
    out.push_back({kOperator, fee_ * ev.reward, current_block(), ev.index});
    std::size_t width = std::max(pps_.size(), prop_.size());
    for (std::size_t k = 0; k < width; ++k)
        release(static_cast<MinerId>(k), current_block(), ev.index, out);
}

void MppsEngine::pending_rewards(std::map<MinerId, double>& out) const {
    // Unpaid PPS worth; an upper bound on what the min rule can still release.
    std::size_t width = pps_.size();
    for (std::size_t k = 0; k < width; ++k) {
        double p = pps_[k] - paid_.get(static_cast<MinerId>(k));
        if (p > 0) out[static_cast<MinerId>(k)] += p;
    }
}

// --- SMPPS -------------------------------------------------------------------

SmppsEngine::SmppsEngine(const EngineConfig& cfg)
    : fee_(cfg.fee), pinned_(cfg.const_buffer) {}

void SmppsEngine::pay_fraction(double frac, std::int64_t cause, std::uint64_t at,
                               std::vector<PayoutEvent>& out) {
    if (frac <= 0) return;
    frac = std::min(frac, 1.0);
    for (std::size_t k = 0; k < due_.size(); ++k) {
        double w = due_[k];
        if (w <= 0) continue;
        double amount = frac < 1.0 ? w * frac : w;
        out.push_back({static_cast<MinerId>(k), amount, cause, at});
        due_.at(static_cast<MinerId>(k)) = w - amount;
        due_total_.add(-amount);
    }
}

void SmppsEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    double w = (1.0 - fee_) * ev.p_eff * ev.reward;
    due_.at(ev.miner) += w;
    due_total_.add(w);
    if (!pinned_) buffer_.add(-w);
    if (ev.is_block && !pinned_) buffer_.add(ev.reward);

    if (!pinned_) {
        // Funds cover all work done: everyone is paid in full immediately.
        if (buffer_.value() >= 0 && due_total_.value() > 0)
            pay_fraction(1.0, ev.is_block ? current_block() : kImmediate, ev.index, out);
        else if (ev.is_block && due_total_.value() > 0)
            pay_fraction(ev.reward / due_total_.value(), current_block(), ev.index, out);
    } else if (ev.is_block && due_total_.value() > 0) {
        // Constant-buffer harness: each block pays the fraction B / (-R)
        // of every due reward, as if the buffer never moved.
        double r = *pinned_;
        double frac = r < 0 ? ev.reward / (-r) : 1.0;
        pay_fraction(frac, current_block(), ev.index, out);
    }
}

void SmppsEngine::pending_rewards(std::map<MinerId, double>& out) const {
    for (std::size_t k = 0; k < due_.size(); ++k)
        if (due_[k] > 0) out[static_cast<MinerId>(k)] += due_[k];
}

void SmppsEngine::export_state(std::map<std::string, double>& out) const {
    out["R"] = buffer();
    out["due_total"] = due_total_.value();
}

// --- ESMPPS ------------------------------------------------------------------

EsmppsEngine::EsmppsEngine(const EngineConfig& cfg) : fee_(cfg.fee) {}

int EsmppsEngine::find(int g) const {
    while (parent_[g] != g) g = parent_[g];
    return g;
}

int EsmppsEngine::new_group(double frac) {
    int id = static_cast<int>(parent_.size());
    parent_.push_back(id);
    group_frac_.push_back(frac);
    return id;
}

double EsmppsEngine::share_fraction(std::size_t share_ordinal) const {
    if (share_ordinal >= records_.size()) return 0.0;
    return group_frac_[find(records_[share_ordinal].group)];
}

void EsmppsEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    double w = (1.0 - fee_) * ev.p_eff * ev.reward;
    if (surplus_ >= w && levels_.empty()) {
        // Pool holds enough to pay each share in full on submission.
        surplus_ -= w;
        int g = new_group(1.0);
        records_.push_back({ev.miner, w, g});
        out.push_back({ev.miner, w, kImmediate, ev.index});
    } else {
        int g;
        if (!levels_.empty() && levels_.front().fraction == 0.0) {
            g = levels_.front().group;
        } else {
            g = new_group(0.0);
            Level lv;
            lv.fraction = 0.0;
            lv.total_worth = 0.0;
            lv.group = g;
            levels_.insert(levels_.begin(), std::move(lv));
        }
        levels_.front().worth.at(ev.miner) += w;
        levels_.front().total_worth += w;
        records_.push_back({ev.miner, w, g});
    }

    if (!ev.is_block) return;

    double budget = ev.reward + surplus_;
    surplus_ = 0.0;
    // Water-fill: raise the lowest paid fraction until the budget runs out,
    // merging levels as they equalize.
    while (budget > 1e-15 && !levels_.empty()) {
        Level& low = levels_.front();
        double next = levels_.size() > 1 ? levels_[1].fraction : 1.0;
        double rise = next - low.fraction;
        double cost = rise * low.total_worth;
        double applied;
        if (cost <= budget) {
            applied = rise;
            budget -= cost;
        } else {
            applied = budget / low.total_worth;
            budget = 0.0;
        }
        if (applied > 0) {
            for (std::size_t k = 0; k < low.worth.size(); ++k) {
                double amt = low.worth.get(static_cast<MinerId>(k)) * applied;
                if (amt > 0)
                    out.push_back({static_cast<MinerId>(k), amt, current_block(), ev.index});
            }
            low.fraction += applied;
            group_frac_[find(low.group)] = low.fraction;
        }
        if (levels_.size() > 1 && low.fraction >= levels_[1].fraction) {
            // Merge the raised bottom level into the next one.
            Level& up = levels_[1];
            parent_[find(low.group)] = find(up.group);
            for (std::size_t k = 0; k < low.worth.size(); ++k)
                up.worth.at(static_cast<MinerId>(k)) += low.worth.get(static_cast<MinerId>(k));
            up.total_worth += low.total_worth;
            levels_.erase(levels_.begin());
        } else if (low.fraction >= 1.0) {
            levels_.erase(levels_.begin()); // fully paid
        }
    }
    if (budget > 0) surplus_ += budget;
}

void EsmppsEngine::pending_rewards(std::map<MinerId, double>& out) const {
    for (const auto& lv : levels_) {
        double remaining = 1.0 - lv.fraction;
        if (remaining <= 0) continue;
        for (std::size_t k = 0; k < lv.worth.size(); ++k) {
            double p = lv.worth.get(static_cast<MinerId>(k)) * remaining;
            if (p > 0) out[static_cast<MinerId>(k)] += p;
        }
    }
}

} // namespace poolsim
