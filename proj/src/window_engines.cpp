#include "poolsim/window_engines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poolsim {

namespace {

void emit_scratch(const MinerVec& sums, std::int64_t cause, std::uint64_t at_index,
                  std::vector<PayoutEvent>& out, double* paid_total) {
    for (std::size_t k = 0; k < sums.size(); ++k) {
        if (sums[k] <= 0.0) continue;
        out.push_back({static_cast<MinerId>(k), sums[k], cause, at_index});
        if (paid_total) *paid_total += sums[k];
    }
}

} // namespace

// --- simple PPLNS ------------------------------------------------------------

PplnsSimpleEngine::PplnsSimpleEngine(const EngineConfig& cfg)
    : n_(cfg.window_shares), fee_(cfg.fee),
      assume_constant_(cfg.assume_constant_schedule) {
    if (n_ < 1) throw std::invalid_argument("pplns window N must be >= 1");
}

void PplnsSimpleEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    if (seen_p_ < 0) {
        seen_p_ = ev.p_eff;
        seen_reward_ = ev.reward;
    } else if (!assume_constant_ && (ev.p_eff != seen_p_ || ev.reward != seen_reward_)) {
        throw std::invalid_argument(
            "simple PPLNS saw a difficulty/reward change without the constant-schedule flag");
    }
    window_.push_back(ev.miner);
    if (window_.size() > n_) window_.pop_front();
    if (!ev.is_block) return;
    double per_share = (1.0 - fee_) * ev.reward / static_cast<double>(n_);
    scratch_.clear();
    for (MinerId m : window_) scratch_.at(m) += per_share;
    double paid = 0.0;
    emit_scratch(scratch_, current_block(), ev.index, out, &paid);
    out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
}

void PplnsSimpleEngine::pending_rewards(std::map<MinerId, double>& out) const {
    // Each windowed share expects p payments of (1-f)B/N per future share
    // over its remaining window; summarize as the fair value (1-f) p B.
    if (seen_p_ < 0) return;
    for (MinerId m : window_) out[m] += (1.0 - fee_) * seen_p_ * seen_reward_;
}

// --- unit PPLNS --------------------------------------------------------------

PplnsUnitEngine::PplnsUnitEngine(const EngineConfig& cfg)
    : window_(cfg.window_units), fee_(cfg.fee) {
    if (!(window_ > 0)) throw std::invalid_argument("unit-PPLNS X must be positive");
}

void PplnsUnitEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    units_.add(ev.p_eff);
    double ut_after = units_.value();
    timeline_.push_back({ut_after, ev.p_eff, ev.reward, ev.miner});
    max_units_seen_ = std::max(max_units_seen_, ev.p_eff);
    if (ev.is_block) {
        double u1 = ev.p_eff;
        double ut1 = ut_after;
        double cutoff = ut1 - window_ - u1; // only shares above this can be due
        scratch_.clear();
        for (auto it = timeline_.rbegin() + 1; it != timeline_.rend(); ++it) {
            if (it->ut0 <= cutoff) break;
            double units_after = ut1 - it->ut0; // includes the winning share
            double frac = (window_ - units_after + u1) / u1;
            frac = std::clamp(frac, 0.0, 1.0);
            if (frac <= 0.0) continue;
            scratch_.at(it->miner) += (1.0 - fee_) * it->a * it->u * frac / window_;
        }
        double paid = 0.0;
        emit_scratch(scratch_, current_block(), ev.index, out, &paid);
        out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
    }
    prune();
}

void PplnsUnitEngine::prune() {
    // Safe horizon: a future winning share's units are bounded by a multiple
    // of the largest seen; beyond that a share can never re-enter the window.
    double cutoff = units_.value() - window_ - 4.0 * max_units_seen_;
    while (!timeline_.empty() && timeline_.front().ut0 <= cutoff)
        timeline_.pop_front();
}

double PplnsUnitEngine::pending_for(MinerId miner) const {
    double ut = units_.value();
    double sum = 0.0;
    for (const auto& sh : timeline_) {
        if (sh.miner != miner) continue;
        double behind = ut - sh.ut0;
        sum += (1.0 - fee_) * sh.u * sh.a * std::max(window_ - behind, 0.0) / window_;
    }
    return sum;
}

void PplnsUnitEngine::pending_rewards(std::map<MinerId, double>& out) const {
    double ut = units_.value();
    for (const auto& sh : timeline_) {
        double behind = ut - sh.ut0;
        double p = (1.0 - fee_) * sh.u * sh.a * std::max(window_ - behind, 0.0) / window_;
        if (p > 0) out[sh.miner] += p;
    }
}

void PplnsUnitEngine::migrate(double new_fee, double new_window,
                              MigrationStrategy strategy,
                              std::vector<PayoutEvent>& forced_out) {
    if (!(new_window > 0)) throw std::invalid_argument("migration window must be positive");
    if (!(new_fee < 1)) throw std::invalid_argument("migration fee must be < 1");
    double x1 = window_, x2 = new_window;
    double fee_scale = (1.0 - fee_) / (1.0 - new_fee);
    std::uint64_t at = timeline_.empty() ? 0 : shares_seen();

    if (strategy == MigrationStrategy::ScaleUnits) {
        // Units scale by X2/X1 and amplifiers by X1/X2 (times the fee factor);
        // applied newest to oldest since unit edits shift every earlier U.
        double k = x2 / x1;
        for (auto it = timeline_.rbegin(); it != timeline_.rend(); ++it) {
            it->u *= k;
            it->ut0 *= k;
            it->a *= fee_scale / k;
        }
        double scaled = units_.value() * k;
        units_.reset();
        units_.add(scaled);
        max_units_seen_ *= k;
    } else {
        // Keep units; solve each amplifier so the pending reward is unchanged.
        // A share already past the new window has no solvable amplifier and is
        // paid its pending immediately.
        double ut = units_.value();
        for (auto& sh : timeline_) {
            double behind = ut - sh.ut0;
            double old_pending =
                (1.0 - fee_) * sh.u * sh.a * std::max(x1 - behind, 0.0) / x1;
            double new_cap = std::max(x2 - behind, 0.0);
            if (new_cap <= 0.0) {
                if (old_pending > 0.0)
                    forced_out.push_back({sh.miner, old_pending, kImmediate, at});
                sh.a = 0.0;
            } else {
                sh.a = old_pending * x2 / ((1.0 - new_fee) * sh.u * new_cap);
            }
        }
    }
    fee_ = new_fee;
    window_ = x2;
}

void PplnsUnitEngine::export_state(std::map<std::string, double>& out) const {
    out["UT"] = units_.value();
    out["live_shares"] = static_cast<double>(timeline_.size());
}

bool PplnsUnitEngine::export_timeline(std::ostream& out) const {
    out << "U_T0,miner,u,a,paid_fraction\n";
    double ut = units_.value();
    char buf[160];
    for (const auto& sh : timeline_) {
        double progress = std::min((ut - sh.ut0) / window_, 1.0);
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g\n", sh.ut0, sh.miner,
                      sh.u, sh.a, progress);
        out << buf;
    }
    return true;
}

void PplnsUnitEngine::restore_timeline(std::vector<UnitShare> shares) {
    timeline_.clear();
    double top = 0.0;
    for (const auto& sh : shares) {
        if (!(sh.u > 0)) throw std::invalid_argument("timeline units must be positive");
        if (sh.ut0 <= top && !timeline_.empty())
            throw std::invalid_argument("timeline must be ordered by U_T0");
        top = sh.ut0;
        max_units_seen_ = std::max(max_units_seen_, sh.u);
        timeline_.push_back(sh);
    }
    units_.reset();
    units_.add(top);
}

// --- pay-once PPLNS ----------------------------------------------------------

PayOncePplnsEngine::PayOncePplnsEngine(const EngineConfig& cfg)
    : window_(cfg.window_units), fee_(cfg.fee) {
    if (!(window_ > 0) || !(window_ < 1))
        throw std::invalid_argument("pay-once X must be in (0, 1)");
}

void PayOncePplnsEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    if (ev.is_block) {
        double budget = window_;
        scratch_.clear();
        double paid = 0.0;
        while (!backlog_.empty() && budget > 1e-18) {
            BacklogShare& top = backlog_.back();
            double avail = top.remaining * top.u;
            double take = std::min(avail, budget);
            if (take > 0) {
                scratch_.at(top.miner) += (1.0 - fee_) * top.a * take / window_;
                budget -= take;
                top.remaining -= take / top.u;
            }
            if (top.remaining <= 1e-15)
                backlog_.pop_back(); // fully paid shares are deleted
            else
                break; // budget exhausted inside this share
        }
        emit_scratch(scratch_, current_block(), ev.index, out, &paid);
        out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
    }
    backlog_.push_back({ev.p_eff, ev.reward, 1.0, ev.miner});
}

bool PayOncePplnsEngine::export_timeline(std::ostream& out) const {
    out << "U_T0,miner,u,a,paid_fraction\n";
    char buf[160];
    double ut = 0.0;
    for (const auto& sh : backlog_) {
        ut += sh.u;
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g\n", ut, sh.miner, sh.u,
                      sh.a, 1.0 - sh.remaining);
        out << buf;
    }
    return true;
}

void PayOncePplnsEngine::pending_rewards(std::map<MinerId, double>& out) const {
    // Unpaid entitlement at face value: the one-time payment the remainder
    // would receive if a block consumed it now (the operator's running loan).
    for (const auto& sh : backlog_) {
        double p = (1.0 - fee_) * sh.a * sh.remaining * sh.u / window_;
        if (p > 0) out[sh.miner] += p;
    }
}

// --- shift PPLNS -------------------------------------------------------------

ShiftPplnsEngine::ShiftPplnsEngine(const EngineConfig& cfg)
    : shift_units_(cfg.window_units), n_shifts_(cfg.shift_count), fee_(cfg.fee) {
    if (!(shift_units_ > 0)) throw std::invalid_argument("shift length X must be positive");
    if (n_shifts_ < 1) throw std::invalid_argument("shift count N must be >= 1");
}

void ShiftPplnsEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    current_.scores.at(ev.miner) += (1.0 - fee_) * ev.p_eff * ev.reward;
    current_.units += ev.p_eff;
    if (ev.is_block) {
        ++current_.blocks;
        last_block_ = current_block();
    }
    if (current_.units < shift_units_) return;

    // Shift boundary: reached X accumulated units, independent of blocks.
    double x1 = current_.units;
    int blocks_in_shift = current_.blocks;
    ring_.push_back(std::move(current_));
    current_ = Shift{};
    if (ring_.size() > static_cast<std::size_t>(n_shifts_)) ring_.pop_front();
    if (blocks_in_shift == 0) return;

    scratch_.clear();
    std::size_t width = 0;
    for (const auto& sh : ring_) width = std::max(width, sh.scores.size());
    for (std::size_t k = 0; k < width; ++k) {
        double score = 0.0;
        for (const auto& sh : ring_) score += sh.scores.get(static_cast<MinerId>(k));
        if (score > 0.0)
            scratch_.at(static_cast<MinerId>(k)) +=
                score * blocks_in_shift / (n_shifts_ * x1);
    }
    double paid = 0.0;
    emit_scratch(scratch_, last_block_, ev.index, out, &paid);
}

void ShiftPplnsEngine::pending_rewards(std::map<MinerId, double>& out) const {
    // A shift's score is paid at the close of that shift and the next N-1;
    // with E[L] = X1 per shift the expected remaining payments are S * k / N.
    std::size_t width = current_.scores.size();
    for (const auto& sh : ring_) width = std::max(width, sh.scores.size());
    for (std::size_t k = 0; k < width; ++k) {
        MinerId m = static_cast<MinerId>(k);
        double sum = current_.scores.get(m); // all N closes still ahead
        int age = 0;
        for (auto it = ring_.rbegin(); it != ring_.rend(); ++it, ++age) {
            double remaining = static_cast<double>(n_shifts_ - 1 - age) / n_shifts_;
            if (remaining <= 0) break;
            sum += it->scores.get(m) * remaining;
        }
        if (sum > 0) out[m] += sum;
    }
}

// --- framework ---------------------------------------------------------------

FrameworkEngine::FrameworkEngine(const EngineConfig& cfg)
    : decay_(cfg.decay), separation_(cfg.separation), fee_(cfg.fee) {
    decay_.validate();
    horizon_ = decay_.support(1e-12);
}

double FrameworkEngine::payment(double A, double p1, double p2, double x) const {
    // Interior fast paths use exact product forms; the generic branch takes
    // the second difference of Q, which only matters near the decay edges.
    switch (decay_.kind) {
        case DecayKind::Step: {
            double X = decay_.X;
            if (x >= 0 && x + p1 + p2 <= X) return A * p1 / X;
            break;
        }
        case DecayKind::Exponential: {
            if (x >= 0) {
                double al = decay_.alpha;
                double e = std::exp(-al * x);
                return A / (p2 * al) * e * std::expm1(-al * p1) * std::expm1(-al * p2);
            }
            break;
        }
        case DecayKind::Linear: {
            double X = decay_.X;
            if (x >= 0 && x + p1 + p2 <= X)
                return 2.0 * A * p1 * (X - x - 0.5 * (p1 + p2)) / (X * X);
            break;
        }
        case DecayKind::Custom:
            break;
    }
    double d = (decay_.Q(x + p1 + p2) - decay_.Q(x + p2)) -
               (decay_.Q(x + p1) - decay_.Q(x));
    return A * d / p2;
}

void FrameworkEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    double u = ev.p_eff;
    if (!ev.is_block) {
        timeline_.push_back({head_, u, ev.reward, ev.miner});
        head_ += u;
        prune();
        return;
    }
    double block_start = head_;
    scratch_.clear();
    for (const auto& sh : timeline_) {
        double x = block_start - (sh.pos + sh.u);
        if (x > horizon_) continue;
        double amt = (1.0 - fee_) * payment(sh.a, sh.u, u, x);
        if (amt > 0) scratch_.at(sh.miner) += amt;
    }
    // The winning share is paid by its own block at x = -p2.
    double self = (1.0 - fee_) * payment(ev.reward, u, u, -u);
    if (self > 0) scratch_.at(ev.miner) += self;
    double paid = 0.0;
    emit_scratch(scratch_, current_block(), ev.index, out, &paid);
    out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});

    // Timeline insertion. For future rewards the winning share is split in
    // two half-amplifier shares around a void of O - p units, superposing the
    // positions the block could occupy within the share's width.
    if (separation_ == 0.0) {
        timeline_.push_back({head_, u, ev.reward, ev.miner});
        head_ += u;
    } else if (separation_ >= u) {
        timeline_.push_back({head_, u, 0.5 * ev.reward, ev.miner});
        timeline_.push_back({head_ + separation_, u, 0.5 * ev.reward, ev.miner});
        head_ += separation_ + u;
    } else {
        // O < p is unspecified; place the share before the full void.
        ++short_void_fallbacks_;
        timeline_.push_back({head_, u, ev.reward, ev.miner});
        head_ += u + separation_;
    }
    prune();
}

void FrameworkEngine::prune() {
    while (!timeline_.empty() &&
           timeline_.front().pos + timeline_.front().u + horizon_ < head_)
        timeline_.pop_front();
    if (timeline_.empty()) head_ = 0.0; // keeps positions small across resets
}

void FrameworkEngine::pending_rewards(std::map<MinerId, double>& out) const {
    for (const auto& sh : timeline_) {
        double x = head_ - (sh.pos + sh.u);
        double p = (1.0 - fee_) * sh.u * sh.a * (1.0 - decay_.R(x));
        if (p > 0) out[sh.miner] += p;
    }
}

} // namespace poolsim
