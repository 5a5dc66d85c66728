#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evology/engine.hpp"

namespace evology {

/// Non-overlapping log returns ln p(t) - ln p(t-horizon), oldest first.
/// A series of n prices yields floor((n-1)/horizon) observations.
std::vector<double> log_returns(std::span<const double> prices, int horizon);

/// Sample autocorrelation for lags 0..max_lag (index = lag, [0] = 1).
std::vector<double> acf(std::span<const double> series, int max_lag);

/// Half-width of the 95% white-noise band for a series of length n.
double acf_band(std::size_t n);

/// Population-moment excess kurtosis m4/m2^2 - 3.
double excess_kurtosis(std::span<const double> series);

/// Population-moment skewness m3/m2^(3/2).
double skewness(std::span<const double> series);

/// Rolling sample standard deviation (denominator n-1); output index i covers
/// input window [i, i+window).
std::vector<double> rolling_volatility(std::span<const double> returns, int window);

/// One stylized-fact check. Descriptive checks (no threshold) always pass and
/// say so in the note; checks starved of data fail with note "insufficient
/// data".
struct FactCheck {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool has_threshold = true;
    bool pass = false;
    std::string note;
};

struct FactsReport {
    std::vector<FactCheck> checks;

    const FactCheck* find(const std::string& name) const;
    bool all_testable_pass() const;
};

/// Evaluates the battery of stylized-fact checks on a completed run:
/// no-autocorrelation, heavy-tails, gain-loss-asymmetry, aggregational-
/// gaussianity, intermittency, volatility-clustering, leverage-effect,
/// volume-volatility-correlation and short-ratio.
FactsReport facts_report(const RunRecord& run);

nlohmann::json to_json(const FactsReport& report);

}  // namespace evology
