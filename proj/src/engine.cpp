#include "poolsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poolsim/buffer_engines.hpp"
#include "poolsim/round_engines.hpp"
#include "poolsim/window_engines.hpp"

namespace poolsim {

const char* method_name(Method m) {
    switch (m) {
        case Method::Proportional: return "proportional";
        case Method::Pps: return "pps";
        case Method::Slush: return "slush";
        case Method::Geometric: return "geometric";
        case Method::Dgm: return "dgm";
        case Method::PplnsSimple: return "pplns";
        case Method::PplnsUnit: return "unit-pplns";
        case Method::PplnsPayOnce: return "pay-once-pplns";
        case Method::ShiftPplns: return "shift-pplns";
        case Method::Framework: return "framework";
        case Method::Mpps: return "mpps";
        case Method::Smpps: return "smpps";
        case Method::Esmpps: return "esmpps";
        case Method::Solo: return "solo";
        case Method::Hybrid: return "hybrid";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(Method::Hybrid); ++i) {
        Method m = static_cast<Method>(i);
        if (name == method_name(m)) return m;
    }
    throw std::invalid_argument("unknown reward method: " + name);
}

// --- DecaySpec ---------------------------------------------------------------

double DecaySpec::r(double x) const {
    if (x < 0) return 0.0;
    switch (kind) {
        case DecayKind::Step:
            return x <= X ? 1.0 / X : 0.0;
        case DecayKind::Exponential:
            return alpha * std::exp(-alpha * x);
        case DecayKind::Linear:
            return x <= X ? 2.0 * (X - x) / (X * X) : 0.0;
        case DecayKind::Custom: {
            if (table.empty() || x < table.front().first || x > table.back().first) return 0.0;
            auto it = std::upper_bound(table.begin(), table.end(), x,
                                       [](double v, const auto& p) { return v < p.first; });
            if (it == table.begin()) return table.front().second;
            auto lo = std::prev(it);
            if (it == table.end()) return table.back().second;
            double t = (x - lo->first) / (it->first - lo->first);
            return lo->second + t * (it->second - lo->second);
        }
    }
    return 0.0;
}

double DecaySpec::R(double y) const {
    if (y <= 0) return 0.0;
    switch (kind) {
        case DecayKind::Step:
            return y >= X ? 1.0 : y / X;
        case DecayKind::Exponential:
            return -std::expm1(-alpha * y);
        case DecayKind::Linear:
            return y >= X ? 1.0 : y * (2.0 * X - y) / (X * X);
        case DecayKind::Custom: {
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < table.size(); ++i) {
                double x0 = table[i].first, x1 = table[i + 1].first;
                double r0 = table[i].second, r1 = table[i + 1].second;
                if (y <= x0) break;
                double hi = std::min(y, x1);
                double t = hi - x0;
                double slope = (r1 - r0) / (x1 - x0);
                acc += r0 * t + 0.5 * slope * t * t;
                if (y <= x1) break;
            }
            return acc;
        }
    }
    return 0.0;
}

double DecaySpec::Q(double y) const {
    if (y <= 0) return 0.0;
    switch (kind) {
        case DecayKind::Step:
            return y >= X ? y - 0.5 * X : 0.5 * y * y / X;
        case DecayKind::Exponential:
            // y - (1 - exp(-a y))/a, computed cancellation-free
            return (std::expm1(-alpha * y) + alpha * y) / alpha;
        case DecayKind::Linear:
            return y >= X ? y - X / 3.0 : (X * y * y - y * y * y / 3.0) / (X * X);
        case DecayKind::Custom: {
            double accR = 0.0, accQ = 0.0;
            for (std::size_t i = 0; i + 1 < table.size(); ++i) {
                double x0 = table[i].first, x1 = table[i + 1].first;
                double r0 = table[i].second, r1 = table[i + 1].second;
                if (y <= x0) break;
                double hi = std::min(y, x1);
                double t = hi - x0;
                double slope = (r1 - r0) / (x1 - x0);
                accQ += accR * t + 0.5 * r0 * t * t + slope * t * t * t / 6.0;
                double seg = x1 - x0;
                accR += r0 * seg + 0.5 * slope * seg * seg;
                if (y <= x1) return accQ;
            }
            if (!table.empty() && y > table.back().first)
                accQ += accR * (y - table.back().first);
            return accQ;
        }
    }
    return 0.0;
}

double DecaySpec::support(double eps) const {
    switch (kind) {
        case DecayKind::Step:
        case DecayKind::Linear:
            return X;
        case DecayKind::Exponential:
            return -std::log(eps) / alpha;
        case DecayKind::Custom:
            return table.empty() ? 0.0 : table.back().first;
    }
    return 0.0;
}

void DecaySpec::validate() const {
    switch (kind) {
        case DecayKind::Step:
        case DecayKind::Linear:
            if (!(X > 0)) throw std::invalid_argument("decay.X must be positive");
            return;
        case DecayKind::Exponential:
            if (!(alpha > 0)) throw std::invalid_argument("decay.alpha must be positive");
            return;
        case DecayKind::Custom: {
            if (table.size() < 2)
                throw std::invalid_argument("decay.table needs at least two points");
            for (std::size_t i = 0; i < table.size(); ++i) {
                if (table[i].second < 0)
                    throw std::invalid_argument("decay.table values must be nonnegative");
                if (table[i].first < 0)
                    throw std::invalid_argument("decay.table abscissae must be nonnegative");
                if (i && table[i].first <= table[i - 1].first)
                    throw std::invalid_argument("decay.table abscissae must be increasing");
            }
            double mass = R(table.back().first);
            if (std::abs(mass - 1.0) > 1e-6)
                throw std::invalid_argument("decay.table must integrate to 1 (within 1e-6)");
            return;
        }
    }
}

// --- EngineConfig ------------------------------------------------------------

void EngineConfig::validate() const {
    if (!(fee < 1.0)) throw std::invalid_argument("fee must be < 1");
    switch (method) {
        case Method::Geometric:
            if (!(c > 0 && c < 1)) throw std::invalid_argument("c must be in (0, 1)");
            break;
        case Method::Dgm:
            if (!(o >= 0 && o <= 1)) throw std::invalid_argument("o must be in [0, 1]");
            if (o == 1.0) {
                if (c != 0.0) throw std::invalid_argument("o = 1 requires c = 0");
                if (!free_r || !(*free_r > 1))
                    throw std::invalid_argument("o = 1 requires a chosen r > 1");
            } else if (!(c > 0 && c < 1)) {
                throw std::invalid_argument("c must be in (0, 1)");
            }
            break;
        case Method::Slush:
            if (!(slush_c_seconds > 0)) throw std::invalid_argument("C must be positive");
            break;
        case Method::PplnsSimple:
            if (window_shares < 1) throw std::invalid_argument("window N must be >= 1");
            break;
        case Method::PplnsUnit:
            if (!(window_units > 0)) throw std::invalid_argument("X must be positive");
            break;
        case Method::PplnsPayOnce:
            if (!(window_units > 0 && window_units < 1))
                throw std::invalid_argument("pay-once X must be in (0, 1)");
            break;
        case Method::ShiftPplns:
            if (!(window_units > 0)) throw std::invalid_argument("shift length X must be positive");
            if (shift_count < 1) throw std::invalid_argument("shift count N must be >= 1");
            break;
        case Method::Framework:
            decay.validate();
            if (separation < 0) throw std::invalid_argument("separation O must be >= 0");
            break;
        case Method::Hybrid: {
            if (components.empty())
                throw std::invalid_argument("hybrid needs component engines");
            double wsum = 0.0;
            for (const auto& [w, sub] : components) {
                if (!(w >= 0)) throw std::invalid_argument("hybrid weights must be >= 0");
                if (!sub) throw std::invalid_argument("hybrid component missing config");
                sub->validate();
                wsum += w;
            }
            if (std::abs(wsum - 1.0) > 1e-12)
                throw std::invalid_argument("hybrid weights must sum to 1");
            break;
        }
        default:
            break;
    }
}

// --- RewardEngine ------------------------------------------------------------

void RewardEngine::step(const ShareEvent& ev, std::vector<PayoutEvent>& out) {
    if (any_ && ev.index <= last_index_)
        throw std::invalid_argument("engine_step: event indices must be strictly increasing");
    any_ = true;
    last_index_ = ev.index;
    ++shares_;
    if (ev.is_block) ++blocks_;
    process(ev, out);
}

void RewardEngine::export_state(std::map<std::string, double>&) const {}

// --- Ledger ------------------------------------------------------------------

void Ledger::on_event(const ShareEvent& ev) {
    ++shares_;
    if (ev.is_block) {
        ++blocks_;
        revenue_.add(ev.reward);
    }
}

void Ledger::on_payout(const PayoutEvent& p) {
    if (p.recipient == kOperator) {
        operator_records_.add(p.amount);
        return;
    }
    if (p.amount < 0)
        throw std::logic_error("miner payout amounts must be nonnegative");
    miners_[p.recipient].add(p.amount);
    paid_.add(p.amount);
}

double Ledger::miner_total(MinerId id) const {
    auto it = miners_.find(id);
    return it == miners_.end() ? 0.0 : it->second.value();
}

double Ledger::operator_fee_records(MinerId) const { return operator_records_.value(); }

LedgerSnapshot Ledger::snapshot(const RewardEngine* engine) const {
    LedgerSnapshot s;
    for (const auto& [id, sum] : miners_) s.cumulative[id] = sum.value();
    s.revenue = revenue_.value();
    s.operator_net = operator_net();
    s.blocks = blocks_;
    s.shares = shares_;
    if (engine) engine->pending_rewards(s.pending);
    return s;
}

// --- conservation ------------------------------------------------------------

ConservationReport conservation_check(const std::vector<PayoutEvent>& payouts,
                                      const std::vector<std::pair<std::int64_t, double>>& block_rewards,
                                      ConservationClass cls,
                                      double tol_per_block) {
    ConservationReport rep;
    for (const auto& p : payouts) {
        if (p.recipient != kOperator && p.amount < 0) {
            rep.pass = false;
            rep.detail = "negative miner payout";
            return rep;
        }
    }
    std::map<std::int64_t, KahanSum> per_block;
    KahanSum total_paid;
    for (const auto& p : payouts) {
        if (p.cause >= 0) per_block[p.cause].add(p.amount);
        if (p.recipient != kOperator) total_paid.add(p.amount);
    }
    KahanSum revenue;
    for (const auto& [id, b] : block_rewards) revenue.add(b);

    switch (cls) {
        case ConservationClass::RoundSettled: {
            for (const auto& [id, b] : block_rewards) {
                auto it = per_block.find(id);
                double settled = it == per_block.end() ? 0.0 : it->second.value();
                double residual = std::abs(settled - b);
                rep.max_residual = std::max(rep.max_residual, residual);
                if (residual > tol_per_block * std::max(1.0, b)) {
                    rep.pass = false;
                    rep.detail = "block " + std::to_string(id) + " not fully settled";
                }
            }
            return rep;
        }
        case ConservationClass::Windowed:
        case ConservationClass::OperatorImmediate: {
            // Operator net is revenue minus payouts by definition; recompute the
            // two sides independently and confirm they describe the same money.
            double lhs = revenue.value() - total_paid.value();
            KahanSum alt;
            for (const auto& [id, b] : block_rewards) alt.add(b);
            for (const auto& p : payouts)
                if (p.recipient != kOperator) alt.add(-p.amount);
            double residual = std::abs(lhs - alt.value());
            rep.max_residual = residual;
            if (residual > tol_per_block * std::max(1.0, revenue.value())) {
                rep.pass = false;
                rep.detail = "operator net identity violated";
            }
            return rep;
        }
        case ConservationClass::Buffered: {
            double slack = revenue.value() - total_paid.value();
            rep.max_residual = std::max(0.0, -slack);
            if (slack < -tol_per_block * std::max(1.0, revenue.value())) {
                rep.pass = false;
                rep.detail = "payouts exceed block revenue";
            }
            return rep;
        }
    }
    return rep;
}

// --- hybrid ------------------------------------------------------------------

namespace {

class HybridEngine : public RewardEngine {
public:
    explicit HybridEngine(const EngineConfig& cfg) {
        for (const auto& [w, sub] : cfg.components)
            parts_.emplace_back(w, make_engine(*sub));
    }

    void pending_rewards(std::map<MinerId, double>& out) const override {
        std::map<MinerId, double> tmp;
        for (const auto& [w, e] : parts_) {
            tmp.clear();
            e->pending_rewards(tmp);
            for (const auto& [id, v] : tmp) out[id] += w * v;
        }
    }

    Method method() const override { return Method::Hybrid; }
    ConservationClass conservation_class() const override { return ConservationClass::Windowed; }

protected:
    void process(const ShareEvent& ev, std::vector<PayoutEvent>& out) override {
        for (auto& [w, e] : parts_) {
            scratch_.clear();
            e->step(ev, scratch_);
            for (PayoutEvent p : scratch_) {
                p.amount *= w;
                out.push_back(p);
            }
        }
    }

private:
    std::vector<std::pair<double, std::unique_ptr<RewardEngine>>> parts_;
    std::vector<PayoutEvent> scratch_;
};

} // namespace

std::unique_ptr<RewardEngine> make_engine(const EngineConfig& cfg) {
    cfg.validate();
    switch (cfg.method) {
        case Method::Proportional: return std::make_unique<ProportionalEngine>(cfg);
        case Method::Pps: return std::make_unique<PpsEngine>(cfg);
        case Method::Solo: return std::make_unique<SoloEngine>(cfg);
        case Method::Slush: return std::make_unique<SlushEngine>(cfg);
        case Method::Geometric: return std::make_unique<GeometricEngine>(cfg);
        case Method::Dgm: return std::make_unique<DgmEngine>(cfg);
        case Method::PplnsSimple: return std::make_unique<PplnsSimpleEngine>(cfg);
        case Method::PplnsUnit: return std::make_unique<PplnsUnitEngine>(cfg);
        case Method::PplnsPayOnce: return std::make_unique<PayOncePplnsEngine>(cfg);
        case Method::ShiftPplns: return std::make_unique<ShiftPplnsEngine>(cfg);
        case Method::Framework: return std::make_unique<FrameworkEngine>(cfg);
        case Method::Mpps: return std::make_unique<MppsEngine>(cfg);
        case Method::Smpps: return std::make_unique<SmppsEngine>(cfg);
        case Method::Esmpps: return std::make_unique<EsmppsEngine>(cfg);
        case Method::Hybrid: return std::make_unique<HybridEngine>(cfg);
    }
    throw std::invalid_argument("unknown method");
}

LedgerSnapshot replay(const std::vector<ShareEvent>& events, const EngineConfig& config,
                      std::vector<PayoutEvent>* payouts_out) {
    auto engine = make_engine(config);
    Ledger ledger;
    std::vector<PayoutEvent> payouts;
    for (const auto& ev : events) {
        ledger.on_event(ev);
        payouts.clear();
        engine->step(ev, payouts);
        for (const auto& p : payouts) {
            ledger.on_payout(p);
            if (payouts_out) payouts_out->push_back(p);
        }
    }
    return ledger.snapshot(engine.get());
}

} // namespace poolsim
