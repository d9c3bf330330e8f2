#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "poolsim/acceptance.hpp"
#include "poolsim/engine.hpp"
#include "poolsim/oracles.hpp"
#include "poolsim/presets.hpp"
#include "poolsim/scenario.hpp"
#include "poolsim/simulator.hpp"
#include "poolsim/stream.hpp"
#include "poolsim/window_engines.hpp"

namespace {

using poolsim::ConfigError;

void print_value(const std::string& name, double value, bool csv) {
    if (csv) {
        std::printf("%s,%.17g\n", name.c_str(), value);
    } else {
        std::printf("%s = %.6g\n", name.c_str(), value);
    }
}

const char* kOracleNames =
    "e1 amplification hop-threshold hop hop-table honest-loss prop-variance "
    "pps-reserve pps-ruin geometric mpps-loss smpps-maturity immunity "
    "fluctuation liw posterior-difficulty";

int cmd_oracle(const std::string& name, const std::map<std::string, double>& args,
               const std::vector<double>& list_arg, bool csv) {
    namespace oc = poolsim::oracle;
    auto arg = [&](const char* key, double dflt,
                   bool required = false) -> double {
        auto it = args.find(key);
        if (it == args.end()) {
            if (required) throw ConfigError(std::string("oracle: missing --") + key);
            return dflt;
        }
        return it->second;
    };
    if (name == "e1") {
        print_value("E1", oc::exp_integral_E1(arg("x", 0, true)), csv);
    } else if (name == "amplification") {
        print_value("f", oc::prop_amplification(arg("x", 0, true)), csv);
    } else if (name == "hop-threshold") {
        print_value("x0", oc::prop_hop_threshold(), csv);
    } else if (name == "hop") {
        int m = static_cast<int>(arg("m", 1));
        bool fallback = args.count("fallback") ? args.at("fallback") != 0 : true;
        print_value("amplification", oc::hop_amplification(m, fallback), csv);
    } else if (name == "hop-table") {
        int m_max = static_cast<int>(arg("m-max", 25));
        std::printf("m,with_fallback,without_fallback\n");
        for (const auto& row : oc::hop_table(m_max))
            std::printf(csv ? "%d,%.17g,%.17g\n" : "%d,%.6g,%.6g\n", row.m,
                        row.with_fallback, row.without_fallback);
    } else if (name == "honest-loss") {
        print_value("honest_fraction", oc::prop_honest_loss(), csv);
    } else if (name == "prop-variance") {
        auto s = oc::prop_share_variance(arg("p", 0, true), arg("B", 50.0));
        print_value("mean", s.mean, csv);
        print_value("variance", s.variance, csv);
        print_value("improvement_vs_solo", s.improvement_vs_solo, csv);
    } else if (name == "pps-reserve") {
        print_value("reserve",
                    oc::pps_reserve(arg("B", 50.0), arg("f", 0, true), arg("delta", 0, true)),
                    csv);
    } else if (name == "pps-ruin") {
        print_value("ruin_probability",
                    oc::pps_ruin_probability(arg("B", 50.0), arg("f", 0, true), arg("R", 0, true)),
                    csv);
    } else if (name == "geometric") {
        auto g = oc::geometric_stats(arg("p", 0, true), arg("c", 0, true), arg("f", 0.0),
                                     arg("B", 50.0));
        print_value("mean_per_share", g.mean_per_share, csv);
        print_value("variance_per_share", g.variance_per_share, csv);
        print_value("maturity", g.maturity, csv);
        print_value("fee_mean_per_block", g.fee_mean_per_block, csv);
        print_value("fee_variance_per_block", g.fee_variance_per_block, csv);
    } else if (name == "mpps-loss") {
        print_value("loss_fraction",
                    oc::mpps_expected_loss(static_cast<std::uint64_t>(arg("n", 0, true))), csv);
    } else if (name == "smpps-maturity") {
        print_value("maturity_blocks", oc::smpps_maturity(arg("R", 0, true), arg("B", 50.0)),
                    csv);
    } else if (name == "immunity") {
        int n_max = static_cast<int>(arg("n-max", 5));
        auto table = oc::immunity_solve(arg("p", 0.5), n_max, arg("budget", 1.0));
        std::printf("I,N,f\n");
        for (int i = 1; i <= n_max; ++i)
            for (int n = i; n <= n_max; ++n)
                std::printf("%d,%d,%.17g\n", i, n, table[i - 1][n - 1]);
    } else if (name == "fluctuation") {
        print_value("amplification",
                    oc::fluctuation_amplification(arg("lambda0", 0, true),
                                                  arg("lambda-bar", 0, true), arg("C", 0, true)),
                    csv);
    } else if (name == "liw") {
        auto o = oc::lie_in_wait_optimum(static_cast<int>(arg("m", 1)), arg("h", 0, true),
                                         arg("H0", 0, true), arg("T0", 600.0));
        print_value("T_opt", o.t_opt, csv);
        print_value("amplification", o.amplification, csv);
    } else if (name == "posterior-difficulty") {
        std::vector<double> d = list_arg;
        d.push_back(std::numeric_limits<double>::infinity());
        print_value("amplification", oc::posterior_difficulty_amplification(d), csv);
    } else {
        std::cerr << "unknown oracle '" << name << "'; available: " << kOracleNames << "\n";
        return 2;
    }
    return 0;
}

std::vector<poolsim::UnitShare> read_timeline_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<poolsim::UnitShare> shares;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || (lineno == 1 && line.rfind("U_T0", 0) == 0)) continue;
        poolsim::UnitShare sh;
        int miner;
        double frac;
        if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf,%lf", &sh.ut0, &miner, &sh.u, &sh.a,
                        &frac) != 5)
            throw std::runtime_error("timeline: malformed row at line " + std::to_string(lineno));
        sh.miner = miner;
        shares.push_back(sh);
    }
    return shares;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mining-pool reward system simulator"};
    app.require_subcommand(1);

    // --- run -----------------------------------------------------------------
    auto* run = app.add_subcommand("run", "run a scenario file or a named preset");
    std::string scenario_path, preset_name, out_dir = "out";
    std::uint64_t seed_override = 0;
    int replicas_override = 0;
    std::string emit_log;
    run->add_option("scenario", scenario_path, "scenario JSON file");
    run->add_option("--preset", preset_name, "named preset (see `poolsim presets`)");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed_override, "override the scenario seed");
    run->add_option("--replicas", replicas_override, "override the replica count");
    std::uint64_t horizon_override = 0;
    run->add_option("--horizon", horizon_override, "override horizon_shares");
    run->add_option("--emit-log", emit_log,
                    "also write a replay log of replica 0's first pool stream");

    // --- oracle ----------------------------------------------------------------
    auto* oracle_cmd = app.add_subcommand("oracle", "evaluate a closed-form value");
    std::string oracle_name;
    bool oracle_csv = false;
    std::map<std::string, double> oracle_args;
    std::vector<double> oracle_list;
    oracle_cmd->add_option("name", oracle_name, "oracle name")->required();
    oracle_cmd->add_flag("--csv", oracle_csv, "machine-readable output");
    for (const char* key : {"x", "m", "m-max", "p", "B", "f", "delta", "R", "c", "n",
                            "n-max", "budget", "lambda0", "lambda-bar", "C", "H0", "T0"})
        oracle_cmd->add_option_function<double>(
            std::string("--") + key,
            [&oracle_args, key](double v) { oracle_args[key] = v; });
    oracle_cmd->add_option_function<double>(
        "--hashrate", [&oracle_args](double v) { oracle_args["h"] = v; });
    bool hop_fallback = true;
    oracle_cmd->add_flag("--fallback,!--no-fallback", hop_fallback,
                         "hopper falls back to solo (hop oracle)");
    oracle_cmd->add_option("--difficulties", oracle_list,
                           "increasing difficulty menu (posterior-difficulty)");

    // --- replay ----------------------------------------------------------------
    auto* replay_cmd = app.add_subcommand("replay", "re-execute a share replay log");
    std::string log_path, engine_json, snapshot_out = "snapshot.csv", timeline_out,
        state_out;
    replay_cmd->add_option("log", log_path, "replay log CSV")->required();
    replay_cmd->add_option("--engine", engine_json, "engine config JSON (file or inline)")
        ->required();
    replay_cmd->add_option("--out", snapshot_out, "snapshot CSV path");
    replay_cmd->add_option("--timeline", timeline_out, "also dump the live timeline CSV");
    replay_cmd->add_option("--state", state_out,
                           "also dump engine state (scores, counters) as JSON");

    // --- migrate ---------------------------------------------------------------
    auto* migrate_cmd =
        app.add_subcommand("migrate", "re-parameterize a unit-PPLNS timeline in place");
    std::string timeline_path, migrated_out = "timeline_migrated.csv";
    double from_f = 0.0, from_x = 1.0, to_f = 0.0, to_x = 1.0;
    std::string strategy = "scale";
    migrate_cmd->add_option("--timeline", timeline_path, "timeline CSV")->required();
    migrate_cmd->add_option("--from-f", from_f, "current fee")->required();
    migrate_cmd->add_option("--from-X", from_x, "current window")->required();
    migrate_cmd->add_option("--to-f", to_f, "new fee")->required();
    migrate_cmd->add_option("--to-X", to_x, "new window")->required();
    migrate_cmd->add_option("--strategy", strategy, "scale | amplifier");
    migrate_cmd->add_option("--out", migrated_out, "migrated timeline CSV");

    // --- acceptance --------------------------------------------------------------
    auto* acc = app.add_subcommand("acceptance", "run the acceptance criteria");
    int criterion = 0;
    acc->add_option("--criterion", criterion, "run a single criterion (1-14)");

    // --- presets -----------------------------------------------------------------
    auto* presets_cmd = app.add_subcommand("presets", "list available presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!preset_name.empty()) {
                if (!poolsim::has_preset(preset_name)) {
                    std::cerr << "unknown preset '" << preset_name << "'\n";
                    return 2;
                }
                return poolsim::run_preset(preset_name, out_dir, seed_override,
                                           replicas_override);
            }
            if (scenario_path.empty()) {
                std::cerr << "run: need a scenario file or --preset\n";
                return 2;
            }
            nlohmann::json raw;
            poolsim::ScenarioConfig cfg = poolsim::load_scenario_file(scenario_path, &raw);
            if (seed_override) cfg.seed = seed_override;
            if (replicas_override > 0) cfg.replicas = replicas_override;
            if (horizon_override > 0) cfg.horizon_shares = horizon_override;
            poolsim::SimulationResult result = poolsim::run_scenario(cfg);
            poolsim::write_report_bundle(out_dir, cfg, raw, result);
            if (!emit_log.empty()) {
                std::vector<poolsim::MinerSpec> miners;
                for (std::size_t i = 0; i < cfg.agents.size(); ++i)
                    miners.push_back({static_cast<poolsim::MinerId>(i),
                                      cfg.agents[i].hashrate,
                                      cfg.agents[i].share_difficulty});
                auto events = poolsim::generate_stream(
                    poolsim::RngStream(cfg.seed, 0), cfg.difficulty, cfg.reward, miners,
                    std::min<std::uint64_t>(cfg.horizon_shares, 1000000));
                poolsim::write_replay_log_file(emit_log, events);
            }
            std::cout << "report written to " << out_dir << "\n";
            return 0;
        }
        if (oracle_cmd->parsed()) {
            if (oracle_cmd->count("--fallback") || oracle_cmd->count("--no-fallback"))
                oracle_args["fallback"] = hop_fallback ? 1.0 : 0.0;
            return cmd_oracle(oracle_name, oracle_args, oracle_list, oracle_csv);
        }
        if (replay_cmd->parsed()) {
            nlohmann::json ej;
            std::ifstream ef(engine_json);
            if (ef) {
                ef >> ej;
            } else {
                ej = nlohmann::json::parse(engine_json);
            }
            poolsim::EngineConfig ecfg = poolsim::parse_engine_json(ej, "$");
            auto events = poolsim::read_replay_log_file(log_path);
            auto engine = poolsim::make_engine(ecfg);
            poolsim::Ledger ledger;
            std::vector<poolsim::PayoutEvent> payouts;
            for (const auto& ev : events) {
                ledger.on_event(ev);
                payouts.clear();
                engine->step(ev, payouts);
                for (const auto& p : payouts) ledger.on_payout(p);
            }
            poolsim::write_snapshot_csv(snapshot_out, ledger.snapshot(engine.get()));
            if (!timeline_out.empty()) {
                std::ofstream tf(timeline_out);
                if (!engine->export_timeline(tf))
                    std::cerr << "note: this engine keeps no timeline; nothing written\n";
            }
            if (!state_out.empty()) {
                std::map<std::string, double> state;
                engine->export_state(state);
                nlohmann::json sj;
                sj["method"] = poolsim::method_name(ecfg.method);
                for (const auto& [key, value] : state) sj["state"][key] = value;
                std::ofstream sf(state_out);
                sf << sj.dump(2) << "\n";
            }
            std::cout << "snapshot written to " << snapshot_out << "\n";
            return 0;
        }
        if (migrate_cmd->parsed()) {
            poolsim::EngineConfig ecfg;
            ecfg.method = poolsim::Method::PplnsUnit;
            ecfg.fee = from_f;
            ecfg.window_units = from_x;
            poolsim::PplnsUnitEngine engine(ecfg);
            engine.restore_timeline(read_timeline_csv(timeline_path));
            std::vector<poolsim::PayoutEvent> forced;
            auto strat = strategy == "amplifier" ? poolsim::MigrationStrategy::AmplifierOnly
                                                 : poolsim::MigrationStrategy::ScaleUnits;
            engine.migrate(to_f, to_x, strat, forced);
            std::ofstream out(migrated_out);
            engine.export_timeline(out);
            for (const auto& p : forced)
                std::printf("forced payout: miner %d receives %.8f immediately\n",
                            p.recipient, p.amount);
            std::cout << "migrated timeline written to " << migrated_out << "\n";
            return 0;
        }
        if (acc->parsed()) {
            if (criterion > 0) {
                auto r = poolsim::acceptance::run_criterion(criterion);
                std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << ": "
                          << r.name << " — " << r.detail << "\n";
                return r.pass ? 0 : 3;
            }
            auto all = poolsim::acceptance::run_all(std::cout);
            for (const auto& r : all)
                if (!r.pass) return 3;
            return 0;
        }
        if (presets_cmd->parsed()) {
            for (const auto& p : poolsim::preset_list())
                std::printf("%-14s %s\n", p.name.c_str(), p.description.c_str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
