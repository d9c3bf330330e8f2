#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poolsim/events.hpp"
#include "poolsim/stats.hpp"

namespace poolsim {

enum class Method {
    Proportional,
    Pps,
    Slush,
    Geometric,
    Dgm,
    PplnsSimple,
    PplnsUnit,
    PplnsPayOnce,
    ShiftPplns,
    Framework,
    Mpps,
    Smpps,
    Esmpps,
    Solo,
    Hybrid,
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);

enum class DecayKind { Step, Exponential, Linear, Custom };

// Decay function r(x) >= 0 with r(x < 0) = 0 and unit mass, plus its first
// and second antiderivatives R and Q used by the payment integral.
struct DecaySpec {
    DecayKind kind = DecayKind::Step;
    double X = 1.0;      // support width for step/linear decay
    double alpha = 1.0;  // rate for exponential decay
    std::vector<std::pair<double, double>> table; // custom: sampled (x, r(x))

    double r(double x) const;
    double R(double y) const; // int_0^y r
    double Q(double y) const; // int_0^y R
    // Distance beyond which remaining mass is below eps (pruning horizon).
    double support(double eps = 1e-12) const;
    void validate() const; // checks unit mass (1e-6 for custom tables)
};

// How money conservation is audited for a method.
enum class ConservationClass {
    RoundSettled,       // every block's reward is fully split at that block
    Windowed,           // operator net = revenue - payouts (statistical loan)
    OperatorImmediate,  // operator funds per-share payments, keeps blocks
    Buffered,           // payouts never exceed revenue received
};

struct EngineConfig {
    Method method = Method::Proportional;
    double fee = 0.0;            // fixed fee fraction f (< 1, may be negative)
    double c = 0.1;              // variable-fee score parameter (geometric/DGM)
    double o = 0.0;              // cross-round leakage (DGM)
    bool log_scale = false;      // geometric/DGM: logarithmic-scale state
    double log_floor = -1e6;     // sentinel for log(0) scores
    std::optional<double> free_r;// DGM with o = 1: decay rate chosen freely
    double slush_c_seconds = 300.0; // slush score time constant C
    std::uint64_t window_shares = 0; // simple PPLNS N; 0 = use D at start
    double window_units = 1.0;   // unit-PPLNS / pay-once X, shift length X
    int shift_count = 4;         // shift-PPLNS N
    DecaySpec decay;             // framework decay function
    double separation = 0.0;     // framework round separation O
    bool assume_constant_schedule = true; // simple PPLNS precondition flag
    std::optional<double> const_buffer;   // SMPPS harness: pin R to a constant

    // Hybrid: payout = sum of weight_i * component_i payouts.
    std::vector<std::pair<double, std::shared_ptr<EngineConfig>>> components;

    void validate() const; // throws std::invalid_argument naming the field
};

class RewardEngine {
public:
    virtual ~RewardEngine() = default;

    // Feed one event; payouts triggered by it are appended to out.
    // Events must arrive with strictly increasing indices.
    void step(const ShareEvent& ev, std::vector<PayoutEvent>& out);

    virtual void pending_rewards(std::map<MinerId, double>& out) const = 0;
    virtual Method method() const = 0;
    virtual ConservationClass conservation_class() const = 0;

    // Engine-specific scalar state exported for resumability (s, S_k, ...).
    virtual void export_state(std::map<std::string, double>& out) const;

    // Timeline audit dump (CSV). Returns false when the method keeps none.
    virtual bool export_timeline(std::ostream&) const { return false; }

    std::uint64_t shares_seen() const { return shares_; }
    std::int64_t blocks_seen() const { return blocks_; }

protected:
    virtual void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) = 0;
    // Ordinal of the block being processed (valid while ev.is_block).
    std::int64_t current_block() const { return blocks_ - 1; }

private:
    std::uint64_t shares_ = 0;
    std::int64_t blocks_ = 0;
    bool any_ = false;
    std::uint64_t last_index_ = 0;
};

struct LedgerSnapshot {
    std::map<MinerId, double> cumulative; // per-miner payouts
    std::map<MinerId, double> pending;    // per-miner pending estimates
    double operator_net = 0.0;            // revenue minus miner payouts
    double revenue = 0.0;                 // sum of B over blocks found
    std::uint64_t blocks = 0;
    std::uint64_t shares = 0;
};

// Streaming per-miner accounting. Operator net is derived from revenue and
// miner payouts; explicit operator payout events are fee records and are not
// double counted.
class Ledger {
public:
    void on_event(const ShareEvent& ev);
    void on_payout(const PayoutEvent& p);
    LedgerSnapshot snapshot(const RewardEngine* engine = nullptr) const;

    double miner_total(MinerId id) const;
    double operator_fee_records(MinerId id = kOperator) const;
    double operator_net() const { return revenue_.value() - paid_.value(); }
    double revenue() const { return revenue_.value(); }
    std::uint64_t blocks() const { return blocks_; }
    std::uint64_t shares() const { return shares_; }
    const std::map<MinerId, KahanSum>& miners() const { return miners_; }

private:
    std::map<MinerId, KahanSum> miners_; // excludes operator fee records
    KahanSum operator_records_;
    KahanSum paid_;
    KahanSum revenue_;
    std::uint64_t blocks_ = 0;
    std::uint64_t shares_ = 0;
};

struct ConservationReport {
    bool pass = true;
    double max_residual = 0.0;
    std::string detail;
};

// Audits payout events against block revenue per the method's class.
ConservationReport conservation_check(const std::vector<PayoutEvent>& payouts,
                                      const std::vector<std::pair<std::int64_t, double>>& block_rewards,
                                      ConservationClass cls,
                                      double tol_per_block = 1e-9);

std::unique_ptr<RewardEngine> make_engine(const EngineConfig& config);

// Deterministic re-execution of a replay log through a fresh engine.
LedgerSnapshot replay(const std::vector<ShareEvent>& events, const EngineConfig& config,
                      std::vector<PayoutEvent>* payouts_out = nullptr);

} // namespace poolsim
