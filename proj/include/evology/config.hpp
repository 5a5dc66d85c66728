#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "evology/fund.hpp"

namespace evology {

/// Full simulation configuration. Every field has a usable default; a config
/// file only needs to mention what it changes. Section and key names mirror
/// the JSON schema one-to-one.
struct SimConfig {
    struct Population {
        /// Population sizes trade off two effects: the noise-trader
        /// aggregate must stay lumpy enough that sentiment bursts move both
        /// volume and volatility together (a few hundred at most), while
        /// trend-follower echoes at each fund's lookback lag dilute as
        /// 1/n_tf. Counts near 200 sit in the window where both hold.
        int n_nt = 204;
        int n_vi = 200;
        int n_tf = 200;
        /// Initial wealth split across styles (NT, VI, TF); a simplex point.
        std::array<double, 3> initial_shares{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        /// Initial total wealth as a multiple of the asset's marked value
        /// Q*V at the start. This sets how deep into tanh saturation the
        /// market equilibrium sits: at 1.0 funds hold shares only (no cash)
        /// and clearing has no solution; large multiples park most wealth
        /// in cash, where interest compounds faster than the asset and the
        /// price decouples from value over long horizons. 2.3 keeps the
        /// equilibrium allocation moderate with enough cash reserve to
        /// absorb downswings.
        double initial_wealth_multiple = 2.3;
        /// Per-fund annual discount rate draw, uniform over [lo, hi] (VI/NT).
        std::array<double, 2> discount_rate_range{0.015, 0.025};
        /// Per-fund trend lookback draw, uniform integer over [lo, hi] (TF).
        std::array<int, 2> horizon_range{5, 252};
    };

    struct Dividend {
        double delta0 = 0.003465;    ///< initial dividend, currency/share/day
        double growth_annual = 0.0;  ///< annual growth; per-day g = ln(1+this)/252
        double sigma_daily = 0.002;  ///< daily log-shock scale
        double rho = 0.1;            ///< AR(1) autocorrelation of the shock
    };

    /// Sentiment reverts fast (half-life ~2 hours of a trading day) with a
    /// large instantaneous sigma: daily innovations are big, producing the
    /// bursts behind fat tails and volume spikes, while the stationary
    /// spread of ln X stays modest (sigma/sqrt(2 theta) ~ 0.29), keeping
    /// noise-trader positions from drifting into deep shorts. Slow
    /// reversion instead leaves an autocorrelation echo in returns at lags
    /// ~1/theta and fattens monthly rather than daily tails.
    struct Ou {
        double theta = 2.5;  ///< mean-reversion speed, per day
        double sigma = 0.65; ///< volatility of ln X, per day
        double mu = 1.0;     ///< long-run sentiment level
    };

    struct Market {
        double supply_q = 1000.0;
        double interest_annual = 0.01;
        double leverage = 1.0;
        double aggression = 1.0;
        double clearing_tol = 1e-8;  ///< relative residual bound at the clearing price
    };

    struct Flows {
        bool enabled = true;
        double intercept_annual = -0.024610;
        double coef_10y = 0.000053;
        int period_days = 21;
    };

    struct Solvency {
        double liquidation_rate = 0.05;
        int split_factor = 2;  ///< children per split; only 2 is supported
    };

    struct Run {
        long t_max_days = 2520;
        std::uint64_t master_seed = 0;
    };

    Population population;
    Dividend dividend;
    Ou ou;
    Market market;
    Flows flows;
    Solvency solvency;
    Run run;

    /// Per-day dividend log growth implied by the annual growth setting.
    double daily_dividend_growth() const;
    /// Drift used when stepping the dividend process: the log growth minus
    /// the Jensen term sigma^2/2, so growth_annual is the expected growth of
    /// the dividend level rather than of its log. Without the correction the
    /// level would outgrow the configured rate by ~exp(sigma^2/2) per day,
    /// which compounds badly over multi-century horizons.
    double dividend_log_drift() const;
    /// Per-day interest rate implied by the annual rate.
    double daily_interest() const;
};

/// Parses a config document. Unknown keys anywhere are rejected with the full
/// dotted key path; missing keys keep their defaults; the result is validated.
SimConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a JSON config file.
SimConfig load_config_file(const std::string& path);

/// Serializes the fully resolved config; parse_config(to_json(c)) == c.
nlohmann::json to_json(const SimConfig& config);

/// Throws ConfigError describing the first violated constraint, if any.
void validate(const SimConfig& config);

}  // namespace evology
