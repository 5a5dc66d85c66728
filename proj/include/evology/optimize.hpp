#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evology/config.hpp"
#include "evology/engine.hpp"

namespace evology {

enum class Measure {
    SharpeDaily,
    SharpeAnnualized,
    WealthMultiplier,
    CumulativeReturn,
};

Measure parse_measure(const std::string& name);
std::string measure_name(Measure measure);

// Geometric mean of per-period returns over their sample standard deviation;
// undefined (nullopt) for constant returns or when any gross return is
// non-positive. The annualized variant scales by sqrt(periods_per_year).
std::optional<double> sharpe(std::span<const double> returns, bool annualize,
                             double periods_per_year = 252.0);

// W(T) / W(0); requires a positive starting wealth.
double wealth_multiplier(std::span<const double> wealth_path);

// W(T) / W(0) - 1.
double cumulative_return(std::span<const double> wealth_path);

// Applies a measure to a wealth path; nullopt when the measure is undefined
// on that path (zero variance, or non-positive wealth inside a Sharpe).
std::optional<double> path_measure(std::span<const double> wealth_path,
                                   Measure measure);

// One bounded allocation per simulated day.
struct SignalSchedule {
    std::vector<double> values;
};

struct TradingEnv {
    SimConfig config;
    double adaptive_share = 0.02;  ///< fraction of initial total wealth
};

struct EpisodeResult {
    double measure = 0.0;
    bool feasible = true;
    std::string note;
    std::vector<double> wealth_path;  ///< initial point plus one per day
};

// Runs one market where an extra adaptive fund trades the schedule while
// every other fund follows its base strategy. Deterministic per config seed.
EpisodeResult evaluate_schedule(const SignalSchedule& schedule, const TradingEnv& env,
                                Measure measure);

// Per-fund characteristics shown to an investor policy. Lagged returns are
// unit-value returns (performance net of flow distortions); funds younger
// than a lag report their since-inception return instead.
struct FundFeatures {
    int fund_id = -1;
    Style style = Style::ValueInvestor;
    double tna = 0.0;
    double r_1m = 0.0;
    double r_1y = 0.0;
    double r_10y = 0.0;
};

// Desired cash movements per fund id (positive buys, negative redeems) for
// one period, given the funds on offer, free cash and the period budget.
using InvestorPolicy = std::function<std::vector<std::pair<int, double>>(
    const std::vector<FundFeatures>& funds, double cash, double budget)>;

struct InvestorEnv {
    SimConfig config;
    double initial_cash = 1e6;
    double budget_per_period = 1e5;
};

// Runs one market where an outside investor places money with funds on the
// flow cadence, on top of the baseline performance-chasing flows. Fund
// stakes are unit accounted, so baseline flows never dilute the investor.
// The measure applies to the investor's portfolio value path.
EpisodeResult evaluate_investor(const InvestorPolicy& policy, const InvestorEnv& env,
                                Measure measure);

InvestorPolicy null_policy();
// Reference return-chaser: the whole budget goes to the best 1-year fund.
InvestorPolicy chase_best_1y_policy();

// Search candidate: a flat parameter vector with box bounds.
struct Candidate {
    std::vector<double> values;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct SearchTraceRow {
    int evaluation = 0;
    std::uint64_t candidate_hash = 0;
    double measure = 0.0;  ///< NaN when infeasible
    double best_so_far = 0.0;
};

struct SearchResult {
    Candidate best;
    double best_measure = 0.0;
    std::vector<SearchTraceRow> trace;
    int evaluations = 0;
};

enum class SearchMode {
    Static,   ///< few parameters, all perturbed each step
    Dynamic,  ///< long schedules, sparse entrywise perturbation
};

using Objective = std::function<std::optional<double>(const std::vector<double>&)>;

// (1+lambda) elitist evolution strategy with a 1/5-rule step-size adaptation.
// Children within one iteration evaluate in parallel when workers > 1; the
// result is identical for any worker count. Throws when every evaluation in
// the budget is infeasible.
SearchResult optimize_search(const Objective& objective, Candidate initial,
                             int budget, std::uint64_t seed, SearchMode mode,
                             int workers = 1);

std::string trace_csv(const std::vector<SearchTraceRow>& trace);
std::uint64_t candidate_hash(std::span<const double> values);

}  // namespace evology
