#include "evology/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evology/calibration.hpp"
#include "evology/csv.hpp"
#include "evology/experiments.hpp"
#include "evology/stats.hpp"

namespace evology {

namespace fs = std::filesystem;
using nlohmann::json;

void write_market_csv(std::ostream& os, const RunRecord& record) {
    os << kMarketCsvHeader << '\n';
    for (long t = 0; t < record.days_completed; ++t) {
        const auto i = static_cast<std::size_t>(t);
        os << t << ',' << csv_double(record.price[i]) << ','
           << csv_double(record.fundamental[i]) << ','
           << csv_double(record.dividend[i]) << ',' << csv_double(record.volume[i])
           << ',' << csv_double(record.ws_nt[i]) << ',' << csv_double(record.ws_vi[i])
           << ',' << csv_double(record.ws_tf[i]) << ','
           << csv_double(record.admin_position[i]) << ','
           << record.clearing_iterations[i] << '\n';
    }
}

void write_fund_rows(std::ostream& os, std::span<const RunRecord::FundDay> rows) {
    for (const RunRecord::FundDay& row : rows) {
        os << row.day << ',' << row.fund_id << ',' << to_string(row.style) << ','
           << csv_double(row.wealth) << ',' << csv_double(row.cash) << ','
           << csv_double(row.shares) << ',' << csv_double(row.signal) << ','
           << csv_double(row.flow) << '\n';
    }
}

int default_workers() {
    const char* raw = std::getenv("EVOLOGY_WORKERS");
    if (raw == nullptr) {
        return 1;
    }
    try {
        const int parsed = std::stoi(raw);
        return parsed >= 1 ? parsed : 1;
    } catch (const std::exception&) {
        return 1;
    }
}

namespace {

SimConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) {
        SimConfig config;
        validate(config);
        return config;
    }
    return load_config_file(config_path);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    os << text;
}

void echo_config(const fs::path& out_dir, const SimConfig& config) {
    write_text(out_dir / "resolved_config.json", to_json(config).dump(2) + "\n");
}

int resolve_workers(int requested) {
    return requested >= 1 ? requested : default_workers();
}

}  // namespace

int cmd_run(const RunOptions& options) {
    SimConfig config;
    try {
        config = load_or_default(options.config_path);
        if (options.seed) {
            config.run.master_seed = *options.seed;
        }
        if (options.days) {
            if (*options.days < 0) {
                throw ConfigError("run.t_max_days: must be >= 0");
            }
            config.run.t_max_days = *options.days;
        }
        validate(config);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        const fs::path out_dir(options.out_dir);
        fs::create_directories(out_dir);
        echo_config(out_dir, config);

        Simulation sim(config, /*record_fund_panel=*/true);
        std::ofstream funds_csv(out_dir / "funds.csv", std::ios::binary);
        funds_csv << kFundsCsvHeader << '\n';

        std::optional<std::string> failure;
        long failure_day = -1;
        while (sim.day() < config.run.t_max_days) {
            try {
                sim.step_day();
            } catch (const NoBracketError& e) {
                failure = e.what();
                failure_day = sim.day();
                break;
            } catch (const TotalCollapseError& e) {
                failure = e.what();
                failure_day = sim.day();
                break;
            }
            const auto rows = sim.drain_fund_panel();
            write_fund_rows(funds_csv, rows);
        }
        funds_csv.close();

        const RunRecord& record = sim.record();
        {
            std::ofstream market_csv(out_dir / "market.csv", std::ios::binary);
            write_market_csv(market_csv, record);
        }
        if (options.facts) {
            write_text(out_dir / "facts.json",
                       to_json(facts_report(record)).dump(2) + "\n");
        }
        if (failure) {
            write_text(out_dir / "failure.json",
                       json{{"failure", *failure},
                            {"failure_day", failure_day},
                            {"days_completed", record.days_completed}}
                               .dump(2) +
                           "\n");
            std::cerr << "simulation failed on day " << failure_day << ": " << *failure
                      << '\n';
            return kExitSimFailure;
        }
        std::cout << "run complete: " << record.days_completed << " days, final price "
                  << csv_double(record.final_price()) << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_simplex(const SimplexOptions& options) {
    SimConfig config;
    try {
        config = load_or_default(options.config_path);
        if (options.points < 1 || options.reps < 1 || options.years < 1) {
            throw ConfigError("simplex: points, reps and years must be >= 1");
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        const fs::path out_dir(options.out_dir);
        fs::create_directories(out_dir);
        echo_config(out_dir, config);

        const std::vector<SimplexPoint> points =
            sample_simplex(options.points, config.run.master_seed);
        const SweepResult result = run_sweep(points, options.reps, options.years,
                                             config, resolve_workers(options.workers));
        write_text(out_dir / "sweep.csv", sweep_csv(result));

        int failed = 0;
        for (const SweepPointResult& p : result.points) {
            failed += p.failed;
        }
        std::cout << "sweep complete: " << result.points.size() << " points x "
                  << options.reps << " reps, " << failed << " failed runs\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_calibrate(const CalibrateOptions& options) {
    FundPanel panel;
    FlowRegressionData data;
    OlsResult result;
    try {
        panel = read_panel_csv_file(options.data_path);
        ScreenConfig screen;
        screen.min_tna = options.min_tna;
        screen.min_age_months = options.min_age_months;
        data = build_flow_regression(panel, options.lags, screen);
        result = ols_fit(data.design, data.response, data.names);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        std::cout << format_ols_table(result);

        json doc = to_json(result);
        doc["settings"] = {{"data", options.data_path},
                           {"lags", options.lags},
                           {"min_tna", options.min_tna},
                           {"min_age_months", options.min_age_months}};
        doc["screen"] = {{"rows_in_panel", data.rows_in_panel},
                         {"rows_dropped_screen", data.rows_dropped_screen},
                         {"rows_dropped_window", data.rows_dropped_window}};
        const fs::path out_path(options.out_path);
        if (out_path.has_parent_path()) {
            fs::create_directories(out_path.parent_path());
        }
        write_text(out_path, doc.dump(2) + "\n");
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

SearchProblem trading_problem(const TradingEnv& env, Measure measure, SearchMode mode) {
    const long t_max = env.config.run.t_max_days;
    const std::size_t dim =
        mode == SearchMode::Static ? 1 : static_cast<std::size_t>(t_max);
    SearchProblem problem;
    problem.initial.values.assign(dim, 0.0);
    problem.initial.lower.assign(dim, -1.0);
    problem.initial.upper.assign(dim, 1.0);
    problem.objective = [env, measure, mode,
                         t_max](const std::vector<double>& values)
        -> std::optional<double> {
        SignalSchedule schedule;
        if (mode == SearchMode::Static) {
            schedule.values.assign(static_cast<std::size_t>(t_max), values[0]);
        } else {
            schedule.values = values;
        }
        const EpisodeResult episode = evaluate_schedule(schedule, env, measure);
        if (!episode.feasible) {
            return std::nullopt;
        }
        return episode.measure;
    };
    return problem;
}

InvestorPolicy weight_policy(std::vector<double> weights) {
    if (weights.size() != 3) {
        throw std::invalid_argument("weight_policy needs exactly 3 weights");
    }
    return [weights](const std::vector<FundFeatures>& funds, double cash,
                     double budget) {
        std::vector<std::pair<int, double>> orders;
        const FundFeatures* best = nullptr;
        double best_score = 0.0;
        for (const FundFeatures& f : funds) {
            if (!(f.tna > 0.0)) {
                continue;
            }
            const double score =
                weights[0] * f.r_1m + weights[1] * f.r_1y + weights[2] * f.r_10y;
            if (best == nullptr || score > best_score ||
                (score == best_score && f.fund_id < best->fund_id)) {
                best = &f;
                best_score = score;
            }
        }
        const double amount = std::min(budget, cash);
        if (best != nullptr && best_score > 0.0 && amount > 0.0) {
            orders.emplace_back(best->fund_id, amount);
        }
        return orders;
    };
}

SearchProblem investor_problem(const InvestorEnv& env, Measure measure) {
    SearchProblem problem;
    problem.initial.values.assign(3, 0.0);
    problem.initial.lower.assign(3, -1.0);
    problem.initial.upper.assign(3, 1.0);
    problem.objective =
        [env, measure](const std::vector<double>& values) -> std::optional<double> {
        const EpisodeResult episode =
            evaluate_investor(weight_policy(values), env, measure);
        if (!episode.feasible) {
            return std::nullopt;
        }
        return episode.measure;
    };
    return problem;
}

int cmd_optimize(const OptimizeOptions& options) {
    SimConfig config;
    Measure measure{};
    SearchMode mode{};
    try {
        config = load_or_default(options.config_path);
        if (options.seed) {
            config.run.master_seed = *options.seed;
        }
        validate(config);
        measure = parse_measure(options.measure);
        if (options.mode == "static") {
            mode = SearchMode::Static;
        } else if (options.mode == "dynamic") {
            mode = SearchMode::Dynamic;
        } else {
            throw ConfigError("unknown mode: " + options.mode +
                              " (expected static or dynamic)");
        }
        if (options.task != "trading" && options.task != "investor") {
            throw ConfigError("unknown task: " + options.task +
                              " (expected trading or investor)");
        }
        if (options.budget < 1) {
            throw ConfigError("budget must be >= 1");
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        const fs::path out_dir(options.out_dir);
        fs::create_directories(out_dir);
        echo_config(out_dir, config);

        SearchProblem problem;
        std::optional<double> baseline;
        if (options.task == "trading") {
            TradingEnv env;
            env.config = config;
            problem = trading_problem(env, measure, mode);
            const EpisodeResult base = evaluate_schedule(
                SignalSchedule{std::vector<double>(
                    static_cast<std::size_t>(config.run.t_max_days), 0.0)},
                env, measure);
            if (base.feasible) {
                baseline = base.measure;
            }
        } else {
            InvestorEnv env;
            env.config = config;
            problem = investor_problem(env, measure);
            const EpisodeResult base = evaluate_investor(null_policy(), env, measure);
            if (base.feasible) {
                baseline = base.measure;
            }
        }

        const SearchResult result =
            optimize_search(problem.objective, problem.initial, options.budget,
                            config.run.master_seed, mode,
                            resolve_workers(options.workers));

        write_text(out_dir / "trace.csv", trace_csv(result.trace));
        write_text(out_dir / "best.json",
                   json{{"task", options.task},
                        {"mode", options.mode},
                        {"measure", measure_name(measure)},
                        {"budget", options.budget},
                        {"evaluations", result.evaluations},
                        {"values", result.best.values},
                        {"best_measure", result.best_measure},
                        {"baseline_measure",
                         baseline ? json(*baseline) : json(nullptr)}}
                           .dump(2) +
                       "\n");

        std::cout << "baseline " << measure_name(measure) << ": ";
        if (baseline) {
            std::cout << *baseline;
        } else {
            std::cout << "undefined";
        }
        std::cout << "\noptimized " << measure_name(measure) << ": "
                  << result.best_measure << " (" << result.evaluations
                  << " evaluations)\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSimFailure;
    }
}

namespace {

std::vector<int> parse_lags(const std::string& raw) {
    std::vector<int> lags;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        lags.push_back(std::stoi(item));
    }
    if (lags.empty()) {
        throw ConfigError("lags: expected a comma-separated list of month counts");
    }
    return lags;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"evology: agent-based market ecology simulator"};
    app.require_subcommand(1);

    RunOptions run_options;
    std::uint64_t run_seed = 0;
    long run_days = 0;
    CLI::App* run = app.add_subcommand("run", "simulate one market and write its series");
    run->add_option("--config", run_options.config_path, "config JSON path");
    CLI::Option* run_seed_opt = run->add_option("--seed", run_seed, "master seed override");
    CLI::Option* run_days_opt = run->add_option("--days", run_days, "day count override");
    run->add_option("--out", run_options.out_dir, "output directory")->required();
    run->add_flag("--facts", run_options.facts, "also write facts.json");

    SimplexOptions simplex_options;
    CLI::App* simplex =
        app.add_subcommand("simplex", "terminal wealth shares over the ecology simplex");
    simplex->add_option("--points", simplex_options.points, "simplex sample size");
    simplex->add_option("--reps", simplex_options.reps, "seeds per point");
    simplex->add_option("--years", simplex_options.years, "years per run");
    simplex->add_option("--config", simplex_options.config_path, "config JSON path");
    simplex->add_option("--out", simplex_options.out_dir, "output directory")->required();
    simplex->add_option("--workers", simplex_options.workers,
                        "parallel workers (default: EVOLOGY_WORKERS or 1)");

    CalibrateOptions calibrate_options;
    std::string lags_raw = "1,12";
    CLI::App* calibrate =
        app.add_subcommand("calibrate", "fit the flow-performance regression");
    calibrate->add_option("--data", calibrate_options.data_path, "panel CSV path")
        ->required();
    calibrate->add_option("--lags", lags_raw, "comma-separated return lags in months");
    calibrate->add_option("--min-tna", calibrate_options.min_tna,
                          "minimum fund size screen");
    calibrate->add_option("--min-age-months", calibrate_options.min_age_months,
                          "minimum fund age screen");
    calibrate->add_option("--out", calibrate_options.out_path, "result JSON path")
        ->required();

    OptimizeOptions optimize_options;
    std::uint64_t optimize_seed = 0;
    CLI::App* optimize = app.add_subcommand("optimize", "search for better strategies");
    optimize->add_option("--task", optimize_options.task, "trading or investor");
    optimize->add_option("--mode", optimize_options.mode, "static or dynamic");
    optimize->add_option("--budget", optimize_options.budget, "evaluation budget");
    optimize->add_option("--measure", optimize_options.measure,
                         "sharpe, sharpe_annualized, wealth_multiplier or "
                         "cumulative_return");
    optimize->add_option("--config", optimize_options.config_path, "config JSON path");
    CLI::Option* optimize_seed_opt =
        optimize->add_option("--seed", optimize_seed, "master seed override");
    optimize->add_option("--out", optimize_options.out_dir, "output directory")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (run->parsed()) {
            if (*run_seed_opt) {
                run_options.seed = run_seed;
            }
            if (*run_days_opt) {
                run_options.days = run_days;
            }
            return cmd_run(run_options);
        }
        if (simplex->parsed()) {
            return cmd_simplex(simplex_options);
        }
        if (calibrate->parsed()) {
            calibrate_options.lags = parse_lags(lags_raw);
            return cmd_calibrate(calibrate_options);
        }
        if (optimize->parsed()) {
            if (*optimize_seed_opt) {
                optimize_options.seed = optimize_seed;
            }
            return cmd_optimize(optimize_options);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return kExitConfigError;
}

}  // namespace evology
