#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "evology/fund.hpp"

namespace evology {

/// Bounded allocation fraction tanh(beta * signal), always in [-1, 1] so a
/// fund's asset position never exceeds its (levered) budget.
double smooth_signal(double signal, double aggression);

/// Target holdings phi_tilde * lambda * wealth / price, in shares.
/// The fund's order is target minus current holdings.
double target_position(double bounded, double leverage, double wealth, double price);

/// phi-tilde of `fund` at a candidate price. VI/NT re-evaluate their log2
/// mispricing signal at p; TF and schedule funds committed before clearing.
double bounded_signal_at(const Fund& fund, double price);

/// Target holdings of `fund` at a candidate price, with wealth marked at p.
/// Inactive or zero-value funds hold nothing.
double fund_target(const Fund& fund, double price);

/// Order size (target minus holdings) of `fund` at a candidate price.
double excess_demand(const Fund& fund, double price);

/// Raised when no price in [1e-10, 1e10] * previous price balances aggregate
/// target holdings against supply. Carries samples of the aggregate curve.
struct NoBracketError : std::runtime_error {
    NoBracketError(std::string msg, std::vector<std::pair<double, double>> curve)
        : std::runtime_error(std::move(msg)), samples(std::move(curve)) {}
    std::vector<std::pair<double, double>> samples;
};

struct ClearingResult {
    double price = 0.0;
    int iterations = 0;
    double residual = 0.0;  ///< |sum target + admin - supply| / supply at price
};

/// Finds p* with sum_i target_i(p*) = supply - admin_remaining, where the
/// administrator inventory is held passively. Brackets geometrically from the
/// previous price, then closes in with bisection/secant steps on log price
/// down to machine precision; relative_tolerance is only verified at the end,
/// never aimed at, so repeated runs land on the same root to the last bit.
ClearingResult clear_market(std::span<const Fund> funds, double supply,
                            double admin_remaining, double previous_price,
                            double relative_tolerance = 1e-8,
                            int max_iterations = 200);

struct ExecutionSummary {
    double volume = 0.0;       ///< shares changing hands, each transfer once
    double fund_cash_paid = 0.0;  ///< aggregate fund cash out = p * admin_sell
};

/// Moves every active fund to its target at the clearing price and books the
/// cash legs. admin_sell is the administrator inventory absorbed by funds
/// today (negative when the administrator is covering an inherited short).
ExecutionSummary execute_orders(std::span<Fund> funds, double clearing_price,
                                double admin_sell);

}  // namespace evology
