#include "evology/fund.hpp"

#include <cmath>

namespace evology {

std::string to_string(Style s) {
    switch (s) {
        case Style::NoiseTrader: return "NT";
        case Style::ValueInvestor: return "VI";
        case Style::TrendFollower: return "TF";
        case Style::Adaptive: return "ADAPTIVE";
    }
    return "?";
}

double value_asset(double dividend, double daily_growth, double annual_discount) {
    const double annual_dividend = kTradingDaysPerYear * dividend;
    const double annual_growth = std::exp(kTradingDaysPerYear * daily_growth) - 1.0;
    if (annual_discount <= annual_growth) {
        throw ConfigError("discount rate " + std::to_string(annual_discount) +
                          " must exceed annual dividend growth " +
                          std::to_string(annual_growth));
    }
    return annual_dividend * (1.0 + annual_growth) / (annual_discount - annual_growth);
}

double signal_vi(double valuation, double price) {
    if (!(valuation > 0.0) || !(price > 0.0)) {
        throw std::domain_error("signal_vi requires positive valuation and price");
    }
    return std::log2(valuation / price);
}

double signal_nt(double sentiment_level, double valuation, double price) {
    if (!(sentiment_level > 0.0)) {
        throw std::domain_error("signal_nt requires a positive sentiment level");
    }
    return std::log2(sentiment_level) + signal_vi(valuation, price);
}

double signal_tf(double price_lag1, double price_lag_horizon) {
    if (!(price_lag1 > 0.0) || !(price_lag_horizon > 0.0)) {
        throw std::domain_error("signal_tf requires positive prices");
    }
    return std::log2(price_lag1 / price_lag_horizon);
}

}  // namespace evology
