#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evology/config.hpp"
#include "evology/engine.hpp"
#include "evology/optimize.hpp"

namespace evology {

// Column layouts shared by the command-line tool and the tests that assert
// byte-identical reruns. One market row per completed day, t starting at 0.
inline constexpr const char* kMarketCsvHeader =
    "t,price,fundamental_value,dividend,volume,ws_nt,ws_vi,ws_tf,"
    "admin_position,clearing_iters";
inline constexpr const char* kFundsCsvHeader =
    "t,fund_id,style,wealth,cash,shares,signal,flow";

void write_market_csv(std::ostream& os, const RunRecord& record);
void write_fund_rows(std::ostream& os, std::span<const RunRecord::FundDay> rows);

/// Worker-pool size when a command has no explicit count: the
/// EVOLOGY_WORKERS environment variable, or 1 when unset or unusable.
int default_workers();

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;   ///< bad flags, config or input schema
inline constexpr int kExitSimFailure = 2;    ///< the simulation itself failed

struct RunOptions {
    std::string config_path;  ///< empty: built-in defaults
    std::optional<std::uint64_t> seed;
    std::optional<long> days;
    std::string out_dir;
    bool facts = false;
};

/// Runs one simulation and writes market.csv, funds.csv and
/// resolved_config.json (plus facts.json on request) into out_dir. On
/// simulation failure the completed days are still written, along with a
/// failure.json, and the exit code is 2.
int cmd_run(const RunOptions& options);

struct SimplexOptions {
    int points = 50;
    int reps = 3;
    int years = 20;
    std::string config_path;
    std::string out_dir;
    int workers = 0;  ///< 0: default_workers()
};

/// Wealth-share ecology sweep over sampled simplex points; writes sweep.csv
/// and resolved_config.json. Output bytes never depend on the worker count.
int cmd_simplex(const SimplexOptions& options);

struct CalibrateOptions {
    std::string data_path;
    std::vector<long> lags{1, 12};
    double min_tna = 15e6;
    int min_age_months = 36;
    std::string out_path;  ///< regression JSON file
};

/// Fits the flow-performance regression on a fund panel CSV, prints the
/// coefficient table and writes the full result (with the resolved settings)
/// as JSON to out_path.
int cmd_calibrate(const CalibrateOptions& options);

struct OptimizeOptions {
    std::string task = "trading";  ///< trading | investor
    std::string mode = "static";   ///< static | dynamic
    int budget = 200;
    std::string measure = "wealth_multiplier";
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int workers = 0;  ///< 0: default_workers()
};

/// Runs a strategy search and writes trace.csv, best.json and
/// resolved_config.json; prints the baseline-versus-optimized comparison.
int cmd_optimize(const OptimizeOptions& options);

/// A search-ready objective with its starting candidate and box bounds.
struct SearchProblem {
    Objective objective;
    Candidate initial;
};

/// Trading-strategy search space: static mode searches the single constant
/// bounded signal; dynamic mode searches one signal per episode day. Both
/// are boxed to [-1, 1] and start from the all-cash signal 0.
SearchProblem trading_problem(const TradingEnv& env, Measure measure, SearchMode mode);

/// Investor-strategy search space: three score weights in [-1, 1] over the
/// lagged fund returns, driving weight_policy below.
SearchProblem investor_problem(const InvestorEnv& env, Measure measure);

/// Linear return-chasing family: score = w1*r_1m + w2*r_1y + w3*r_10y per
/// fund; the whole period budget goes to the top scorer when its score is
/// positive, otherwise the investor stays in cash. Weights (0,0,0) reproduce
/// the null policy; (0,1,0) reproduces the 1-year return chaser.
InvestorPolicy weight_policy(std::vector<double> weights);

/// Parses argv and dispatches to the subcommands; returns the exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace evology
