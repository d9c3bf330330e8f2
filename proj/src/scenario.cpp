#include "poolsim/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace poolsim {

using nlohmann::json;

std::string poolsim_version() { return "poolsim 0.1.0"; }

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

double get_num(const json& j, const std::string& path, const char* key, double dflt,
               bool required = false) {
    if (!j.contains(key)) {
        if (required) fail(path + "." + key, "required field missing");
        return dflt;
    }
    if (!j[key].is_number()) fail(path + "." + key, "expected a number");
    return j[key].get<double>();
}

std::uint64_t get_uint(const json& j, const std::string& path, const char* key,
                       std::uint64_t dflt, bool required = false) {
    if (!j.contains(key)) {
        if (required) fail(path + "." + key, "required field missing");
        return dflt;
    }
    if (!j[key].is_number_unsigned() && !j[key].is_number_integer())
        fail(path + "." + key, "expected a nonnegative integer");
    auto v = j[key].get<std::int64_t>();
    if (v < 0) fail(path + "." + key, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

bool get_bool(const json& j, const std::string& path, const char* key, bool dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_boolean()) fail(path + "." + key, "expected a boolean");
    return j[key].get<bool>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& dflt, bool required = false) {
    if (!j.contains(key)) {
        if (required) fail(path + "." + key, "required field missing");
        return dflt;
    }
    if (!j[key].is_string()) fail(path + "." + key, "expected a string");
    return j[key].get<std::string>();
}

DecaySpec parse_decay(const json& j, const std::string& path) {
    check_keys(j, path, {"kind", "X", "alpha", "table"});
    DecaySpec d;
    std::string kind = get_str(j, path, "kind", "step");
    if (kind == "step")
        d.kind = DecayKind::Step;
    else if (kind == "exponential")
        d.kind = DecayKind::Exponential;
    else if (kind == "linear")
        d.kind = DecayKind::Linear;
    else if (kind == "custom")
        d.kind = DecayKind::Custom;
    else
        fail(path + ".kind", "expected step|exponential|linear|custom");
    d.X = get_num(j, path, "X", 1.0);
    d.alpha = get_num(j, path, "alpha", 1.0);
    if (j.contains("table")) {
        if (!j["table"].is_array()) fail(path + ".table", "expected an array of [x, r] pairs");
        for (const auto& row : j["table"]) {
            if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
                fail(path + ".table", "expected [x, r] number pairs");
            d.table.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
    }
    return d;
}

StepSchedule parse_schedule(const json& j, const std::string& path, const char* value_key) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of segments");
    std::vector<ScheduleSegment> segs;
    int i = 0;
    for (const auto& seg : j) {
        std::string p = path + "[" + std::to_string(i++) + "]";
        check_keys(seg, p, {"start", value_key});
        segs.push_back({get_uint(seg, p, "start", 0, true),
                        get_num(seg, p, value_key, 0.0, true)});
    }
    return StepSchedule(std::move(segs));
}

} // namespace

EngineConfig parse_engine_json(const json& j, const std::string& path) {
    check_keys(j, path,
               {"method", "f", "c", "o", "log_scale", "log_floor", "r", "C", "N", "X",
                "decay", "O", "assume_constant_schedule", "const_buffer", "components"});
    EngineConfig cfg;
    std::string m = get_str(j, path, "method", "", true);
    try {
        cfg.method = method_from_name(m);
    } catch (const std::invalid_argument& e) {
        fail(path + ".method", e.what());
    }
    cfg.fee = get_num(j, path, "f", 0.0);
    cfg.c = get_num(j, path, "c", 0.1);
    cfg.o = get_num(j, path, "o", 0.0);
    cfg.log_scale = get_bool(j, path, "log_scale", false);
    cfg.log_floor = get_num(j, path, "log_floor", -1e6);
    if (j.contains("r")) cfg.free_r = get_num(j, path, "r", 0.0);
    cfg.slush_c_seconds = get_num(j, path, "C", 300.0);
    cfg.window_shares = get_uint(j, path, "N", cfg.method == Method::ShiftPplns ? 4 : 0);
    if (cfg.method == Method::ShiftPplns)
        cfg.shift_count = static_cast<int>(get_uint(j, path, "N", 4));
    cfg.window_units = get_num(j, path, "X", 1.0);
    if (j.contains("decay")) cfg.decay = parse_decay(j["decay"], path + ".decay");
    cfg.separation = get_num(j, path, "O", 0.0);
    cfg.assume_constant_schedule = get_bool(j, path, "assume_constant_schedule", true);
    if (j.contains("const_buffer")) cfg.const_buffer = get_num(j, path, "const_buffer", 0.0);
    if (j.contains("components")) {
        if (!j["components"].is_array()) fail(path + ".components", "expected an array");
        int i = 0;
        for (const auto& comp : j["components"]) {
            std::string p = path + ".components[" + std::to_string(i++) + "]";
            check_keys(comp, p, {"weight", "engine"});
            double w = get_num(comp, p, "weight", 0.0, true);
            if (!comp.contains("engine")) fail(p + ".engine", "required field missing");
            auto sub = std::make_shared<EngineConfig>(
                parse_engine_json(comp["engine"], p + ".engine"));
            cfg.components.emplace_back(w, std::move(sub));
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return cfg;
}

ScenarioConfig parse_scenario_json(const json& j) {
    check_keys(j, "$",
               {"pools", "agents", "difficulty", "reward", "horizon_shares", "replicas",
                "seed", "probe", "record_buffer_trace", "trace_every"});
    ScenarioConfig cfg;
    if (!j.contains("pools") || !j["pools"].is_array() || j["pools"].empty())
        fail("$.pools", "expected a non-empty array");
    int i = 0;
    for (const auto& pj : j["pools"]) {
        std::string path = "$.pools[" + std::to_string(i++) + "]";
        check_keys(pj, path, {"name", "engine", "oblivious", "saturating_hopper"});
        PoolSpec spec;
        spec.name = get_str(pj, path, "name", "pool" + std::to_string(i - 1));
        if (!pj.contains("engine")) fail(path + ".engine", "required field missing");
        spec.engine = parse_engine_json(pj["engine"], path + ".engine");
        spec.oblivious = get_bool(pj, path, "oblivious", false);
        spec.saturating_hopper = get_bool(pj, path, "saturating_hopper", false);
        cfg.pools.push_back(std::move(spec));
    }
    auto pool_index = [&cfg](const std::string& name, const std::string& path) {
        for (std::size_t k = 0; k < cfg.pools.size(); ++k)
            if (cfg.pools[k].name == name) return static_cast<int>(k);
        fail(path, "unknown pool name '" + name + "'");
    };
    if (j.contains("agents")) {
        if (!j["agents"].is_array()) fail("$.agents", "expected an array");
        i = 0;
        for (const auto& aj : j["agents"]) {
            std::string path = "$.agents[" + std::to_string(i++) + "]";
            check_keys(aj, path, {"name", "hashrate", "share_difficulty", "policy"});
            AgentSpec spec;
            spec.name = get_str(aj, path, "name", "agent" + std::to_string(i - 1));
            spec.hashrate = get_num(aj, path, "hashrate", 1.0);
            if (!(spec.hashrate > 0)) fail(path + ".hashrate", "must be positive");
            spec.share_difficulty = get_num(aj, path, "share_difficulty", 1.0);
            if (!(spec.share_difficulty > 0)) fail(path + ".share_difficulty", "must be positive");
            if (aj.contains("policy")) {
                const auto& pj = aj["policy"];
                std::string p = path + ".policy";
                check_keys(pj, p,
                           {"kind", "pool", "pools", "duty_cycle", "duty_period",
                            "fallback_solo", "threshold", "ambush_time"});
                std::string kind = get_str(pj, p, "kind", "constant");
                if (kind == "constant")
                    spec.policy.kind = PolicyKind::Constant;
                else if (kind == "intermittent")
                    spec.policy.kind = PolicyKind::Intermittent;
                else if (kind == "prop-hopper")
                    spec.policy.kind = PolicyKind::PropHopper;
                else if (kind == "buffer-hopper")
                    spec.policy.kind = PolicyKind::BufferHopper;
                else if (kind == "saboteur")
                    spec.policy.kind = PolicyKind::Saboteur;
                else if (kind == "lie-in-wait")
                    spec.policy.kind = PolicyKind::LieInWait;
                else
                    fail(p + ".kind", "unknown policy kind '" + kind + "'");
                if (pj.contains("pool"))
                    spec.policy.pools.push_back(
                        pool_index(get_str(pj, p, "pool", "", true), p + ".pool"));
                if (pj.contains("pools")) {
                    if (!pj["pools"].is_array()) fail(p + ".pools", "expected an array");
                    for (const auto& pn : pj["pools"]) {
                        if (!pn.is_string()) fail(p + ".pools", "expected pool names");
                        spec.policy.pools.push_back(
                            pool_index(pn.get<std::string>(), p + ".pools"));
                    }
                }
                spec.policy.duty_cycle = get_num(pj, p, "duty_cycle", 1.0);
                spec.policy.duty_period = get_uint(pj, p, "duty_period", 1000);
                spec.policy.fallback_solo = get_bool(pj, p, "fallback_solo", true);
                spec.policy.threshold = get_num(pj, p, "threshold", 0.0);
                spec.policy.ambush_time = get_num(pj, p, "ambush_time", 0.0);
            }
            if (spec.policy.pools.empty() && spec.policy.kind != PolicyKind::Constant)
                fail(path + ".policy", "policy requires target pool(s)");
            if (spec.policy.pools.empty()) spec.policy.pools.push_back(0);
            cfg.agents.push_back(std::move(spec));
        }
    }
    if (j.contains("difficulty"))
        cfg.difficulty = DifficultySchedule(parse_schedule(j["difficulty"], "$.difficulty", "D"));
    if (j.contains("reward"))
        cfg.reward = RewardSchedule(parse_schedule(j["reward"], "$.reward", "B"));
    cfg.horizon_shares = get_uint(j, "$", "horizon_shares", 100000);
    cfg.replicas = static_cast<int>(get_uint(j, "$", "replicas", 8));
    cfg.seed = get_uint(j, "$", "seed", 1);
    if (j.contains("probe")) {
        const auto& pj = j["probe"];
        check_keys(pj, "$.probe", {"trigger", "pool", "stride", "round_age"});
        std::string trig = get_str(pj, "$.probe", "trigger", "none");
        if (trig == "none")
            cfg.probe.trigger = ProbeSpec::Trigger::None;
        else if (trig == "stride")
            cfg.probe.trigger = ProbeSpec::Trigger::Stride;
        else if (trig == "round-age")
            cfg.probe.trigger = ProbeSpec::Trigger::RoundAge;
        else if (trig == "buffer-positive")
            cfg.probe.trigger = ProbeSpec::Trigger::BufferPositive;
        else if (trig == "buffer-negative")
            cfg.probe.trigger = ProbeSpec::Trigger::BufferNegative;
        else
            fail("$.probe.trigger", "unknown trigger '" + trig + "'");
        if (pj.contains("pool"))
            cfg.probe.pool = pool_index(get_str(pj, "$.probe", "pool", "", true), "$.probe.pool");
        cfg.probe.stride = get_uint(pj, "$.probe", "stride", 0);
        cfg.probe.round_age = get_uint(pj, "$.probe", "round_age", 0);
    }
    cfg.record_buffer_trace = get_bool(j, "$", "record_buffer_trace", false);
    cfg.trace_every = get_uint(j, "$", "trace_every", 1000);
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path, json* raw_out) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open scenario file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
    }
    if (raw_out) *raw_out = j;
    return parse_scenario_json(j);
}

namespace {

void write_estimate_row(std::ofstream& f, const std::string& metric, const Estimate& e) {
    f << metric << "," << format_double(e.value) << "," << format_double(e.half_width_95)
      << "," << e.n << "\n";
}

} // namespace

void write_report_bundle(const std::string& dir, const ScenarioConfig& cfg,
                         const json& config_echo, const SimulationResult& result) {
    std::filesystem::create_directories(dir);
    const auto& s = result.summary;
    {
        std::ofstream f(dir + "/summary.csv");
        f << "metric,value,ci95_half_width,n\n";
        write_estimate_row(f, "probe.mean_payout", s.probe_mean_payout);
        write_estimate_row(f, "probe.variance_per_share", s.probe_variance);
        write_estimate_row(f, "probe.maturity_difficulty_units", s.probe_maturity);
        write_estimate_row(f, "ambush.success_rate", s.ambush_success_rate);
        for (const auto& p : s.pools) {
            write_estimate_row(f, "pool." + p.name + ".operator_net", p.operator_net);
            write_estimate_row(f, "pool." + p.name + ".fee_per_block", p.fee_per_block);
            f << "pool." << p.name << ".blocks_per_replica,"
              << format_double(p.blocks_per_replica) << ",,\n";
        }
    }
    {
        std::ofstream f(dir + "/agents.csv");
        f << "name,shares_per_replica,mean_per_share,mean_per_share_ci95,"
             "total_payout,total_payout_ci95\n";
        for (const auto& m : s.miners) {
            f << m.name << "," << format_double(m.shares_per_replica) << ","
              << format_double(m.mean_per_share.value) << ","
              << format_double(m.mean_per_share.half_width_95) << ","
              << format_double(m.total_payout.value) << ","
              << format_double(m.total_payout.half_width_95) << "\n";
        }
    }
    bool any_trace = false;
    for (const auto& r : result.replicas) any_trace |= !r.buffer_trace.empty();
    if (any_trace) {
        std::ofstream f(dir + "/buffer_trace.csv");
        f << "share_index,R\n";
        for (const auto& r : result.replicas)
            for (const auto& [idx, buf] : r.buffer_trace)
                f << idx << "," << format_double(buf) << "\n";
    }
    {
        json manifest;
        manifest["version"] = poolsim_version();
        manifest["seed"] = cfg.seed;
        manifest["replicas"] = cfg.replicas;
        manifest["horizon_shares"] = cfg.horizon_shares;
        manifest["config"] = config_echo;
        std::ofstream f(dir + "/manifest.json");
        f << manifest.dump(2) << "\n";
    }
}

void write_snapshot_csv(const std::string& path, const LedgerSnapshot& snap) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "miner,cumulative,pending\n";
    std::set<MinerId> ids;
    for (const auto& [id, v] : snap.cumulative) ids.insert(id);
    for (const auto& [id, v] : snap.pending) ids.insert(id);
    for (MinerId id : ids) {
        auto c = snap.cumulative.find(id);
        auto p = snap.pending.find(id);
        f << id << "," << format_double(c == snap.cumulative.end() ? 0.0 : c->second)
          << "," << format_double(p == snap.pending.end() ? 0.0 : p->second) << "\n";
    }
    f << "operator," << format_double(snap.operator_net) << ",0\n";
}

} // namespace poolsim
