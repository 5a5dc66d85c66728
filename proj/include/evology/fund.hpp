#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evology/random.hpp"

namespace evology {

constexpr double kTradingDaysPerYear = 252.0;

enum class Style : std::uint8_t { NoiseTrader, ValueInvestor, TrendFollower, Adaptive };

std::string to_string(Style s);

/// Thrown for parameter combinations the model cannot price (e.g. a discount
/// rate at or below dividend growth, which makes the valuation infinite).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One market participant. Cash may go negative (borrowing); shares may go
/// negative (short position). Only the fields matching `style` are meaningful:
/// discount_rate for VI/NT, horizon for TF, sentiment/sentiment_rng for NT.
struct Fund {
    int id = 0;
    Style style = Style::ValueInvestor;

    double cash = 0.0;
    double shares = 0.0;
    double loans = 0.0;

    double leverage = 1.0;    ///< lambda >= 1
    double aggression = 1.0;  ///< beta > 0
    double discount_rate = 0.02;  ///< per year (VI/NT)
    int horizon = 21;             ///< trend lookback, days (TF)

    OuProcess sentiment;  ///< NT only
    Rng sentiment_rng;    ///< NT only

    bool active = true;
    double initial_wealth = 0.0;
    std::vector<double> wealth_history;  ///< end-of-day wealth since creation

    // Per-day demand inputs, refreshed by the engine before clearing.
    // VI/NT demand depends on the candidate price through log2(value/p);
    // TF and schedule-driven funds commit to a bounded signal up front.
    double valuation = 0.0;        ///< V_i(t) (VI/NT)
    double value_estimate = 0.0;   ///< V_i for VI, X_i*V_i for NT
    double fixed_bounded = 0.0;    ///< committed phi-tilde (TF/Adaptive)
    bool price_sensitive = false;  ///< true when the signal re-evaluates at p

    double bounded_signal = 0.0;   ///< phi-tilde realised at the executed price
};

/// Gordon-growth valuation of the asset from its current daily dividend.
/// The daily dividend and per-day log growth are annualised with 252 trading
/// days; requires the annual discount rate to exceed annual growth.
double value_asset(double dividend, double daily_growth, double annual_discount);

/// Value-investor signal log2(value / price).
double signal_vi(double valuation, double price);

/// Noise-trader signal log2(sentiment * value / price).
double signal_nt(double sentiment_level, double valuation, double price);

/// Trend-follower signal log2(p(t-1) / p(t-horizon)).
double signal_tf(double price_lag1, double price_lag_horizon);

}  // namespace evology
