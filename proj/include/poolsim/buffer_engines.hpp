#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "poolsim/engine.hpp"
#include "poolsim/round_engines.hpp" // MinerVec

namespace poolsim {

// Per-miner PPS and proportional balances; pays out the minimum of the two.
class MppsEngine : public RewardEngine {
public:
    explicit MppsEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Mpps; }
    ConservationClass conservation_class() const override { return ConservationClass::Buffered; }

    double pps_balance(MinerId m) const { return pps_.get(m); }
    double prop_balance(MinerId m) const { return prop_.get(m); }
    double paid_so_far(MinerId m) const { return paid_.get(m); }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    double fee_;
    MinerVec pps_, prop_, paid_;
    MinerVec round_counts_;
    double round_total_ = 0.0;
    void release(MinerId m, std::int64_t cause, std::uint64_t at,
                 std::vector<PayoutEvent>& out);
};

// Global buffer R = revenue - PPS worth of work. R >= 0 pays in full on
// submission; R < 0 splits block rewards in proportion to due amounts.
class SmppsEngine : public RewardEngine {
public:
    explicit SmppsEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Smpps; }
    ConservationClass conservation_class() const override { return ConservationClass::Buffered; }
    void export_state(std::map<std::string, double>& out) const override;

    double buffer() const { return pinned_ ? *pinned_ : buffer_.value(); }
    double due_total() const { return due_total_.value(); }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    double fee_;
    std::optional<double> pinned_; // harness mode: hold R at a fixed level
    MinerVec due_;
    KahanSum due_total_;
    KahanSum buffer_;
    void pay_fraction(double frac, std::int64_t cause, std::uint64_t at,
                      std::vector<PayoutEvent>& out);
};

// Block rewards raise the lowest per-share paid fractions first
// (water-filling), tracked per share via level groups.
class EsmppsEngine : public RewardEngine {
public:
    explicit EsmppsEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Esmpps; }
    ConservationClass conservation_class() const override { return ConservationClass::Buffered; }

    // Paid fraction of the i-th share this engine has seen (0-based).
    double share_fraction(std::size_t share_ordinal) const;
    double surplus() const { return surplus_; }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    struct Level {
        double fraction;
        double total_worth;
        MinerVec worth;
        int group; // id whose fraction is this level's (union-find root)
    };
    double fee_;
    double surplus_ = 0.0; // funds left after paying every share in full
    std::vector<Level> levels_; // sorted ascending by fraction
    // Per-share records: worth and the group the share currently belongs to.
    struct ShareRec {
        MinerId miner;
        double worth;
        int group;
    };
    std::vector<ShareRec> records_;
    std::vector<int> parent_;         // union-find over group ids
    std::vector<double> group_frac_;  // fraction at each root group
    int find(int g) const;
    int new_group(double frac);
};

} // namespace poolsim
