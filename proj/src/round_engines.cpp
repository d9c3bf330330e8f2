#include "poolsim/round_engines.hpp"

#include <cmath>
#include <stdexcept>

namespace poolsim {

double& MinerVec::at(MinerId id) {
    if (id < 0) throw std::invalid_argument("miner id must be nonnegative");
    if (static_cast<std::size_t>(id) >= v_.size()) v_.resize(id + 1, 0.0);
    return v_[id];
}

double MinerVec::get(MinerId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= v_.size()) return 0.0;
    return v_[id];
}

void MinerVec::scale(double k) {
    for (double& x : v_) x *= k;
}

// --- proportional ------------------------------------------------------------

ProportionalEngine::ProportionalEngine(const EngineConfig& cfg) : fee_(cfg.fee) {}

void ProportionalEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    counts_.at(ev.miner) += ev.d; // difficulty-d shares count d units of work
    total_ += ev.d;
    last_p_ = ev.p_eff;
    last_reward_ = ev.reward;
    if (!ev.is_block) return;
    double budget = (1.0 - fee_) * ev.reward;
    double paid = 0.0;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        if (counts_[k] <= 0.0) continue;
        double amount = budget * counts_[k] / total_;
        out.push_back({static_cast<MinerId>(k), amount, current_block(), ev.index});
        paid += amount;
    }
    out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
    counts_.clear();
    total_ = 0.0;
}

void ProportionalEngine::pending_rewards(std::map<MinerId, double>& out) const {
    // Fair-expectation estimate: each unit of round weight is worth (1-f) p B.
    for (std::size_t k = 0; k < counts_.size(); ++k)
        if (counts_[k] > 0.0)
            out[static_cast<MinerId>(k)] += (1.0 - fee_) * last_p_ * last_reward_ * counts_[k];
}

// --- PPS ---------------------------------------------------------------------

PpsEngine::PpsEngine(const EngineConfig& cfg) : fee_(cfg.fee) {}

void PpsEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    out.push_back({ev.miner, (1.0 - fee_) * ev.p_eff * ev.reward, kImmediate, ev.index});
    if (ev.is_block)
        out.push_back({kOperator, ev.reward, current_block(), ev.index});
}

void PpsEngine::pending_rewards(std::map<MinerId, double>&) const {}

// --- solo --------------------------------------------------------------------

void SoloEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    if (ev.is_block)
        out.push_back({ev.miner, ev.reward, current_block(), ev.index});
}

// --- slush -------------------------------------------------------------------

SlushEngine::SlushEngine(const EngineConfig& cfg)
    : fee_(cfg.fee), c_seconds_(cfg.slush_c_seconds) {
    if (!(c_seconds_ > 0))
        throw std::invalid_argument("slush score constant C must be positive");
}

void SlushEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    if (!ev.has_time())
        throw std::invalid_argument("slush engine requires sim_time on events");
    if (!started_) {
        round_start_ = ev.sim_time;
        started_ = true;
    }
    scores_.at(ev.miner) += std::exp((ev.sim_time - round_start_) / c_seconds_);
    total_score_ += std::exp((ev.sim_time - round_start_) / c_seconds_);
    last_p_ = ev.p_eff;
    last_reward_ = ev.reward;
    if (!ev.is_block) return;
    double budget = (1.0 - fee_) * ev.reward;
    double paid = 0.0;
    for (std::size_t k = 0; k < scores_.size(); ++k) {
        if (scores_[k] <= 0.0) continue;
        double amount = budget * scores_[k] / total_score_;
        out.push_back({static_cast<MinerId>(k), amount, current_block(), ev.index});
        paid += amount;
    }
    out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
    scores_.clear();
    total_score_ = 0.0;
    round_start_ = ev.sim_time;
}

void SlushEngine::pending_rewards(std::map<MinerId, double>& out) const {
    if (total_score_ <= 0.0) return;
    // Fair-expectation estimate of the current round's eventual split.
    for (std::size_t k = 0; k < scores_.size(); ++k)
        if (scores_[k] > 0.0)
            out[static_cast<MinerId>(k)] +=
                (1.0 - fee_) * last_reward_ * scores_[k] / total_score_;
}

// --- geometric ---------------------------------------------------------------

GeometricEngine::GeometricEngine(const EngineConfig& cfg)
    : fee_(cfg.fee), c_(cfg.c), log_scale_(cfg.log_scale), log_floor_(cfg.log_floor) {
    if (!(c_ > 0.0) || !(c_ < 1.0))
        throw std::invalid_argument("geometric c must be in (0, 1)");
}

double& GeometricEngine::lscore(MinerId id) {
    if (id < 0) throw std::invalid_argument("miner id must be nonnegative");
    if (static_cast<std::size_t>(id) >= lscores_.size())
        lscores_.resize(id + 1, log_floor_);
    return lscores_[id];
}

void GeometricEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    double p = ev.p_eff;
    double r = 1.0 - p + p / c_;
    if (!log_scale_) {
        if (s_ > 1e100) rescale_scores(s_); // keep the linear state finite
        scores_.at(ev.miner) += s_ * p * ev.reward;
        s_ *= r;
        if (!ev.is_block) return;
        double paid = 0.0;
        for (std::size_t k = 0; k < scores_.size(); ++k) {
            if (scores_[k] <= 0.0) continue;
            double amount = (1.0 - fee_) * (r - 1.0) * scores_[k] / (s_ * p);
            out.push_back({static_cast<MinerId>(k), amount, current_block(), ev.index});
            paid += amount;
        }
        out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
        scores_.clear();
        s_ = 1.0;
    } else {
        double lr = std::log(r);
        double& lS = lscore(ev.miner);
        lS = ls_ + std::log(std::exp(lS - ls_) + p * ev.reward);
        ls_ += lr;
        if (!ev.is_block) return;
        double paid = 0.0;
        for (std::size_t k = 0; k < lscores_.size(); ++k) {
            if (lscores_[k] <= log_floor_) continue;
            double amount = (1.0 - fee_) * (r - 1.0) * std::exp(lscores_[k] - ls_) / p;
            out.push_back({static_cast<MinerId>(k), amount, current_block(), ev.index});
            paid += amount;
        }
        out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
        lscores_.assign(lscores_.size(), log_floor_);
        ls_ = 0.0;
    }
}

void GeometricEngine::pending_rewards(std::map<MinerId, double>& out) const {
    if (!log_scale_) {
        for (std::size_t k = 0; k < scores_.size(); ++k)
            if (scores_[k] > 0.0)
                out[static_cast<MinerId>(k)] +=
                    (1.0 - fee_) * (1.0 - c_) * scores_[k] / s_;
    } else {
        for (std::size_t k = 0; k < lscores_.size(); ++k)
            if (lscores_[k] > log_floor_)
                out[static_cast<MinerId>(k)] +=
                    (1.0 - fee_) * (1.0 - c_) * std::exp(lscores_[k] - ls_);
    }
}

void GeometricEngine::rescale_scores(double divisor) {
    if (!(divisor > 0))
        throw std::invalid_argument("rescale divisor must be positive");
    if (log_scale_) {
        double shift = std::log(divisor);
        for (double& l : lscores_)
            if (l > log_floor_) l -= shift;
        ls_ -= shift;
    } else {
        scores_.scale(1.0 / divisor);
        s_ /= divisor;
    }
}

void GeometricEngine::export_state(std::map<std::string, double>& out) const {
    if (log_scale_) {
        out["ls"] = ls_;
        for (std::size_t k = 0; k < lscores_.size(); ++k)
            out["lS." + std::to_string(k)] = lscores_[k];
    } else {
        out["s"] = s_;
        for (std::size_t k = 0; k < scores_.size(); ++k)
            out["S." + std::to_string(k)] = scores_[k];
    }
}

// --- double geometric --------------------------------------------------------

DgmEngine::DgmEngine(const EngineConfig& cfg)
    : fee_(cfg.fee), c_(cfg.c), o_(cfg.o), log_scale_(cfg.log_scale),
      log_floor_(cfg.log_floor) {
    if (!(o_ >= 0.0) || !(o_ <= 1.0))
        throw std::invalid_argument("dgm o must be in [0, 1]");
    if (o_ == 1.0) {
        if (c_ != 0.0)
            throw std::invalid_argument("dgm with o = 1 requires c = 0");
        if (!cfg.free_r || !(*cfg.free_r > 1.0))
            throw std::invalid_argument("dgm with o = 1 requires a chosen decay rate r > 1");
        free_r_ = *cfg.free_r;
    } else if (!(c_ > 0.0) || !(c_ < 1.0)) {
        throw std::invalid_argument("dgm c must be in (0, 1) when o < 1");
    }
}

double DgmEngine::rate(double p_eff) const {
    if (o_ == 1.0) return free_r_;
    return 1.0 + p_eff * (1.0 - c_) * (1.0 - o_) / c_;
}

double& DgmEngine::lscore(MinerId id) {
    if (id < 0) throw std::invalid_argument("miner id must be nonnegative");
    if (static_cast<std::size_t>(id) >= lscores_.size())
        lscores_.resize(id + 1, log_floor_);
    return lscores_[id];
}

void DgmEngine::process(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    double p = ev.p_eff;
    double r = rate(p);
    if (!log_scale_) {
        if (s_ > 1e100) rescale_scores(s_); // scores persist; rescale or overflow
        scores_.at(ev.miner) += (1.0 - fee_) * (1.0 - c_) * s_ * p * ev.reward;
        s_ *= r;
        if (!ev.is_block) return;
        double paid = 0.0;
        for (std::size_t k = 0; k < scores_.size(); ++k) {
            if (scores_[k] <= 0.0) continue;
            // (1-o) S / (c s); the equivalent (r-1) S / ((1-c) p s) covers c = 0.
            double amount = c_ > 0.0 ? (1.0 - o_) * scores_[k] / (c_ * s_)
                                     : (r - 1.0) * scores_[k] / ((1.0 - c_) * p * s_);
            out.push_back({static_cast<MinerId>(k), amount, current_block(), ev.index});
            paid += amount;
            scores_.at(static_cast<MinerId>(k)) *= o_;
        }
        out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
    } else {
        double lr = std::log(r);
        double& lS = lscore(ev.miner);
        lS = ls_ + std::log(std::exp(lS - ls_) + (1.0 - fee_) * (1.0 - c_) * p * ev.reward);
        ls_ += lr;
        if (!ev.is_block) return;
        double paid = 0.0;
        double lo = o_ > 0.0 ? std::log(o_) : 0.0;
        for (std::size_t k = 0; k < lscores_.size(); ++k) {
            if (lscores_[k] <= log_floor_) continue;
            double rel = std::exp(lscores_[k] - ls_);
            double amount = c_ > 0.0 ? (1.0 - o_) * rel / c_
                                     : (r - 1.0) * rel / ((1.0 - c_) * p);
            out.push_back({static_cast<MinerId>(k), amount, current_block(), ev.index});
            paid += amount;
            if (o_ > 0.0)
                lscores_[k] += lo;
            else
                lscores_[k] = log_floor_;
        }
        out.push_back({kOperator, ev.reward - paid, current_block(), ev.index});
    }
}

void DgmEngine::pending_rewards(std::map<MinerId, double>& out) const {
    if (!log_scale_) {
        for (std::size_t k = 0; k < scores_.size(); ++k)
            if (scores_[k] > 0.0) out[static_cast<MinerId>(k)] += scores_[k] / s_;
    } else {
        for (std::size_t k = 0; k < lscores_.size(); ++k)
            if (lscores_[k] > log_floor_)
                out[static_cast<MinerId>(k)] += std::exp(lscores_[k] - ls_);
    }
}

void DgmEngine::rescale_scores(double divisor) {
    if (!(divisor > 0))
        throw std::invalid_argument("rescale divisor must be positive");
    if (log_scale_) {
        double shift = std::log(divisor);
        for (double& l : lscores_)
            if (l > log_floor_) l -= shift;
        ls_ -= shift;
    } else {
        scores_.scale(1.0 / divisor);
        s_ /= divisor;
    }
}

void DgmEngine::export_state(std::map<std::string, double>& out) const {
    if (log_scale_) {
        out["ls"] = ls_;
        for (std::size_t k = 0; k < lscores_.size(); ++k)
            out["lS." + std::to_string(k)] = lscores_[k];
    } else {
        out["s"] = s_;
        for (std::size_t k = 0; k < scores_.size(); ++k)
            out["S." + std::to_string(k)] = scores_[k];
    }
}

} // namespace poolsim
