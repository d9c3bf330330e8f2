#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "poolsim/engine.hpp"
#include "poolsim/round_engines.hpp" // MinerVec

namespace poolsim {

// Fixed share-count window: each block pays (1-f)B/N to each of the last N
// shares, across round boundaries. Assumes constant difficulty and reward.
class PplnsSimpleEngine : public RewardEngine {
public:
    explicit PplnsSimpleEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::PplnsSimple; }
    ConservationClass conservation_class() const override { return ConservationClass::Windowed; }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    std::uint64_t n_;
    double fee_;
    bool assume_constant_;
    std::deque<MinerId> window_;
    MinerVec scratch_;
    double seen_p_ = -1.0, seen_reward_ = -1.0;
};

// One live share on the unit timeline.
struct UnitShare {
    double ut0;   // cumulative units right after this share was added
    double u;     // units = p_eff at submission
    double a;     // amplifier = B at submission
    MinerId miner;
};

enum class MigrationStrategy {
    ScaleUnits,     // units *= X2/X1, amplifiers *= X1/X2 (back to front)
    AmplifierOnly,  // keep units; rescale amplifiers to preserve pendings
};

// Unit-based PPLNS: window measured in X units of share probability mass;
// hopping-proof under difficulty and reward changes.
class PplnsUnitEngine : public RewardEngine {
public:
    explicit PplnsUnitEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::PplnsUnit; }
    ConservationClass conservation_class() const override { return ConservationClass::Windowed; }
    void export_state(std::map<std::string, double>& out) const override;

    double pending_for(MinerId miner) const;

    // Re-parameterize (f, X) preserving every live share's pending reward.
    // Shares whose pending cannot be preserved are paid out immediately; the
    // forced payments are appended to forced_out.
    void migrate(double new_fee, double new_window,
                 MigrationStrategy strategy, std::vector<PayoutEvent>& forced_out);

    double window() const { return window_; }
    double fee() const { return fee_; }
    double cumulative_units() const { return units_.value(); }
    const std::deque<UnitShare>& timeline() const { return timeline_; }

    // CSV audit dump: U_T0,miner,u,a,paid_fraction (window progress).
    bool export_timeline(std::ostream& out) const override;
    // Rebuild state from an exported timeline (used by the migrate command).
    void restore_timeline(std::vector<UnitShare> shares);

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    double window_;
    double fee_;
    std::deque<UnitShare> timeline_;
    KahanSum units_; // U^T, cumulative units ever submitted
    double max_units_seen_ = 0.0;
    MinerVec scratch_;
    void prune();
};

// Every share is paid at most once, newest-first, from a step window of X
// units per block; paid shares are (partially) deleted.
class PayOncePplnsEngine : public RewardEngine {
public:
    explicit PayOncePplnsEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::PplnsPayOnce; }
    ConservationClass conservation_class() const override { return ConservationClass::Windowed; }

    std::size_t backlog_size() const { return backlog_.size(); }
    bool export_timeline(std::ostream& out) const override;

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    struct BacklogShare {
        double u, a, remaining; // remaining fraction of the share, in [0, 1]
        MinerId miner;
    };
    double window_;
    double fee_;
    std::deque<BacklogShare> backlog_;
    MinerVec scratch_;
};

// Shares grouped into unit-bounded shifts; every shift close pays each
// participant S L / (N X1) over the last N shifts. State is O(N * miners).
class ShiftPplnsEngine : public RewardEngine {
public:
    explicit ShiftPplnsEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::ShiftPplns; }
    ConservationClass conservation_class() const override { return ConservationClass::Windowed; }

    std::size_t stored_shifts() const { return ring_.size(); }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    struct Shift {
        double units = 0.0;
        int blocks = 0;
        MinerVec scores;
    };
    double shift_units_;
    int n_shifts_;
    double fee_;
    Shift current_;
    std::deque<Shift> ring_; // last n_shifts_ closed shifts, newest at back
    std::int64_t last_block_ = kImmediate;
    MinerVec scratch_;
};

// General unit-based framework: shares occupy their width in units on a
// timeline; blocks pay every share the double integral of the decay function
// over both widths, then append a void of O units.
class FrameworkEngine : public RewardEngine {
public:
    explicit FrameworkEngine(const EngineConfig& cfg);
    void pending_rewards(std::map<MinerId, double>& out) const override;
    Method method() const override { return Method::Framework; }
    ConservationClass conservation_class() const override { return ConservationClass::Windowed; }

    // Payment for one share of p1 units and amplifier A, whose end sits x
    // units before the block share of p2 units (x = -p2 for the winner).
    double payment(double A, double p1, double p2, double x) const;

    int short_void_fallbacks() const { return short_void_fallbacks_; }
    std::size_t live_shares() const { return timeline_.size(); }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override;

private:
    struct FwShare {
        double pos; // start position on the timeline, in units
        double u, a;
        MinerId miner;
    };
    DecaySpec decay_;
    double separation_;
    double fee_;
    double horizon_;
    std::deque<FwShare> timeline_;
    double head_ = 0.0;
    int short_void_fallbacks_ = 0;
    MinerVec scratch_;
    void prune();
};

} // namespace poolsim
