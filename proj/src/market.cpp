#include "evology/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace evology {

double smooth_signal(double signal, double aggression) {
    if (!(aggression > 0.0)) {
        throw std::domain_error("aggression must be positive");
    }
    return std::tanh(aggression * signal);
}

double target_position(double bounded, double leverage, double wealth, double price) {
    return bounded * leverage * wealth / price;
}

double bounded_signal_at(const Fund& fund, double price) {
    if (fund.price_sensitive) {
        return smooth_signal(signal_vi(fund.value_estimate, price), fund.aggression);
    }
    return fund.fixed_bounded;
}

double fund_target(const Fund& fund, double price) {
    if (!fund.active) {
        return 0.0;
    }
    const double wealth = fund.cash + price * fund.shares - fund.loans;
    if (wealth == 0.0) {
        return 0.0;
    }
    return target_position(bounded_signal_at(fund, price), fund.leverage, wealth, price);
}

double excess_demand(const Fund& fund, double price) {
    return fund_target(fund, price) - fund.shares;
}

namespace {

/// Aggregate target holdings plus passive administrator inventory, minus
/// supply. The clearing price is a root of this function of price.
double holdings_gap(std::span<const Fund> funds, double supply, double admin_remaining,
                    double price) {
    double total = 0.0;
    for (const Fund& f : funds) {
        total += fund_target(f, price);
    }
    return total + admin_remaining - supply;
}

}  // namespace

ClearingResult clear_market(std::span<const Fund> funds, double supply,
                            double admin_remaining, double previous_price,
                            double relative_tolerance, int max_iterations) {
    if (!(supply > 0.0) || !(previous_price > 0.0)) {
        throw std::domain_error("clear_market requires positive supply and price");
    }

    const auto gap_at = [&](double price) {
        return holdings_gap(funds, supply, admin_remaining, price);
    };

    std::vector<std::pair<double, double>> samples;
    int evaluations = 0;
    const auto sample = [&](double price) {
        const double g = gap_at(price);
        ++evaluations;
        if (samples.size() < 64) {
            samples.emplace_back(price, g);
        }
        return g;
    };

    double p0 = previous_price;
    double g0 = sample(p0);
    if (g0 == 0.0) {
        return {p0, evaluations, 0.0};
    }

    // Grow a geometric bracket outward from yesterday's price. Aggregate
    // demand falls with price for the dominant (VI/NT) curves, so excess
    // demand means searching upward first; the other direction is tried
    // before giving up in case the curve is locally non-monotone.
    const double lo_limit = 1e-10 * previous_price;
    const double hi_limit = 1e10 * previous_price;
    double a = 0.0, b = 0.0, ga = 0.0, gb = 0.0;
    bool bracketed = false;
    for (int attempt = 0; attempt < 2 && !bracketed; ++attempt) {
        const bool upward = (g0 > 0.0) == (attempt == 0);
        double prev_p = p0, prev_g = g0;
        double p = p0;
        while (upward ? p < hi_limit : p > lo_limit) {
            p = upward ? std::min(p * 2.0, hi_limit) : std::max(p * 0.5, lo_limit);
            const double g = sample(p);
            if (g == 0.0) {
                return {p, evaluations, 0.0};
            }
            if ((g > 0.0) != (prev_g > 0.0)) {
                a = std::min(prev_p, p);
                b = std::max(prev_p, p);
                ga = a == prev_p ? prev_g : g;
                gb = a == prev_p ? g : prev_g;
                bracketed = true;
                break;
            }
            prev_p = p;
            prev_g = g;
        }
    }
    if (!bracketed) {
        throw NoBracketError(
            "no clearing price brackets supply in [" + std::to_string(lo_limit) + ", " +
                std::to_string(hi_limit) + "]; aggregate demand never crosses supply",
            std::move(samples));
    }

    // Close the bracket on log price, alternating secant and bisection steps:
    // the secant step gives fast convergence on the smooth tanh curve, the
    // bisection step guarantees progress regardless of curvature.
    double xa = std::log(a), xb = std::log(b);
    double best_p = std::abs(ga) < std::abs(gb) ? a : b;
    double best_g = std::abs(ga) < std::abs(gb) ? ga : gb;
    bool use_secant = true;
    while (evaluations < max_iterations) {
        const double width = xb - xa;
        if (width <= 1e-15 * std::max(1.0, std::max(std::abs(xa), std::abs(xb)))) {
            break;
        }
        double x;
        if (use_secant && gb != ga) {
            x = (xa * gb - xb * ga) / (gb - ga);
            const double margin = 0.01 * width;
            if (!(x > xa + margin && x < xb - margin)) {
                x = 0.5 * (xa + xb);
            }
        } else {
            x = 0.5 * (xa + xb);
        }
        use_secant = !use_secant;

        const double p = std::exp(x);
        const double g = sample(p);
        if (std::abs(g) < std::abs(best_g)) {
            best_g = g;
            best_p = p;
        }
        if (g == 0.0) {
            break;
        }
        if ((g > 0.0) == (ga > 0.0)) {
            xa = x;
            ga = g;
        } else {
            xb = x;
            gb = g;
        }
    }

    const double residual = std::abs(best_g) / supply;
    if (residual > relative_tolerance) {
        throw NoBracketError("clearing did not converge: relative residual " +
                                 std::to_string(residual) + " above tolerance",
                             std::move(samples));
    }
    return {best_p, evaluations, residual};
}

ExecutionSummary execute_orders(std::span<Fund> funds, double clearing_price,
                                double admin_sell) {
    double turnover = 0.0;
    double cash_paid = 0.0;
    for (Fund& f : funds) {
        if (!f.active) {
            continue;
        }
        f.bounded_signal = bounded_signal_at(f, clearing_price);
        const double target = fund_target(f, clearing_price);
        const double delta = target - f.shares;
        f.shares = target;
        f.cash -= clearing_price * delta;
        turnover += std::abs(delta);
        cash_paid += clearing_price * delta;
    }
    return {0.5 * (turnover + std::abs(admin_sell)), cash_paid};
}

}  // namespace evology
