#pragma once

#include <cstdint>
#include <vector>

#include "poolsim/engine.hpp"

namespace poolsim {

// Dense per-miner accumulator; miner ids are small nonnegative integers.
class MinerVec {
public:
    double& at(MinerId id);
    double get(MinerId id) const;
    void clear() { v_.assign(v_.size(), 0.0); }
    void fill(double x) { v_.assign(v_.size(), x); }
    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    void scale(double k);

private:
    std::vector<double> v_;
};

// Round rewards split in proportion to submitted share weight (difficulty).
class ProportionalEngine : public RewardEngine {
public:
    explicit ProportionalEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Proportional; }
    ConservationClass conservation_class() const override { return ConservationClass::RoundSettled; }
    double round_weight() const { return total_; }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    double fee_;
    MinerVec counts_;
    double total_ = 0.0;
    double last_p_ = 0.0, last_reward_ = 0.0;
};

// Immediate (1-f) p B per share; block rewards go to the operator.
class PpsEngine : public RewardEngine {
public:
    explicit PpsEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Pps; }
    ConservationClass conservation_class() const override { return ConservationClass::OperatorImmediate; }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    double fee_;
};

// Block reward to the block finder; no pool at all.
class SoloEngine : public RewardEngine {
public:
    explicit SoloEngine(const EngineConfig&) {}
    void pending_rewards(std::map<MinerId, double>&) const override {}
    Method method() const override { return Method::Solo; }
    ConservationClass conservation_class() const override { return ConservationClass::RoundSettled; }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;
};

// Time-scored rounds: a share submitted T seconds into the round scores
// exp(T/C); rewards are split in proportion to score.
class SlushEngine : public RewardEngine {
public:
    explicit SlushEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Slush; }
    ConservationClass conservation_class() const override { return ConservationClass::RoundSettled; }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    double fee_;
    double c_seconds_;
    MinerVec scores_;
    double total_score_ = 0.0;
    double round_start_ = 0.0;
    bool started_ = false;
    double last_p_ = 0.0, last_reward_ = 0.0;
};

// Geometric method: exponentially decaying score with an operator variable
// fee; supports the exact linear state and the logarithmic-scale twin.
class GeometricEngine : public RewardEngine {
public:
    explicit GeometricEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Geometric; }
    ConservationClass conservation_class() const override { return ConservationClass::RoundSettled; }
    void export_state(std::map<std::string, double>& out) const override;

    // Divide all scores and the score counter by divisor; payouts unchanged.
    void rescale_scores(double divisor);

    double score_counter() const { return s_; }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    double fee_, c_;
    bool log_scale_;
    double log_floor_;
    // linear state
    MinerVec scores_;
    double s_ = 1.0;
    // log state
    std::vector<double> lscores_;
    double ls_ = 0.0;
    double& lscore(MinerId id);
};

// Double geometric method: scores persist across blocks, leaking a fraction
// (1-o) to the operator per block.
class DgmEngine : public RewardEngine {
public:
    explicit DgmEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Dgm; }
    ConservationClass conservation_class() const override { return ConservationClass::Windowed; }
    void export_state(std::map<std::string, double>& out) const override;
    void rescale_scores(double divisor);

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    double fee_, c_, o_;
    bool log_scale_;
    double log_floor_;
    double free_r_ = 0.0; // used when o == 1 (c == 0)
    MinerVec scores_;
    double s_ = 1.0;
    std::vector<double> lscores_;
    double ls_ = 0.0;
    double& lscore(MinerId id);
    double rate(double p_eff) const;
};

} // namespace poolsim
