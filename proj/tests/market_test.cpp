#include <doctest.h>

#include <cmath>
#include <vector>

#include "evology/market.hpp"

using namespace evology;

namespace {

Fund committed_fund(double bounded, double cash, double shares) {
    Fund f;
    f.style = Style::Adaptive;
    f.price_sensitive = false;
    f.fixed_bounded = bounded;
    f.cash = cash;
    f.shares = shares;
    return f;
}

Fund value_fund(double value, double cash, double shares, double beta = 1.0) {
    Fund f;
    f.style = Style::ValueInvestor;
    f.price_sensitive = true;
    f.value_estimate = value;
    f.valuation = value;
    f.aggression = beta;
    f.cash = cash;
    f.shares = shares;
    return f;
}

}  // namespace

TEST_CASE("bounded signal oracle points") {
    CHECK(smooth_signal(0.0, 1.0) == doctest::Approx(0.0));
    CHECK(smooth_signal(0.321928, 1.0) == doctest::Approx(0.3112491875).epsilon(1e-9));
    CHECK(smooth_signal(10.0, 1.0) > 0.99999999);
    CHECK(smooth_signal(10.0, 1.0) <= 1.0);
    CHECK_THROWS_AS(smooth_signal(1.0, 0.0), std::domain_error);
}

TEST_CASE("target position arithmetic") {
    CHECK(target_position(1.0, 1.0, 1000.0, 10.0) == doctest::Approx(100.0));
    CHECK(target_position(-0.5, 1.0, 1000.0, 10.0) == doctest::Approx(-50.0));
    CHECK(target_position(0.0, 3.0, 12345.0, 7.0) == doctest::Approx(0.0));
}

TEST_CASE("excess demand vanishes at the fund's own target") {
    // Holdings feed back into wealth, so the no-trade point solves
    // S = phi * (C + p S) / p, not a one-shot evaluation.
    Fund f = committed_fund(0.5, 1000.0, 0.0);
    const double p = 20.0;
    f.shares = 0.5 * f.cash / (p * (1.0 - 0.5));
    CHECK(excess_demand(f, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.shares == doctest::Approx(50.0));
}

TEST_CASE("saturated value fund demands its whole budget") {
    Fund f = value_fund(2.0 * 25.0, 1000.0, 0.0, 400.0);
    // beta large: tanh(400 * 1) ~ 1, target ~ W/p.
    CHECK(fund_target(f, 25.0) == doctest::Approx(1000.0 / 25.0).epsilon(1e-9));
}

TEST_CASE("price rise against a short position forces buying to cover") {
    Fund f = value_fund(100.0, 3000.0, -10.0);
    for (double p : {120.0, 160.0, 200.0}) {
        // The levered budget shrank with wealth, so the target short is
        // smaller than the held short and the order is a buy.
        CHECK(std::abs(fund_target(f, p)) < std::abs(f.shares));
        CHECK(excess_demand(f, p) > 0.0);
    }
}

TEST_CASE("clearing matches the constant-signal closed form") {
    // 0.5 * 1000 / p = 10  =>  p = 50.
    std::vector<Fund> funds{committed_fund(0.5, 1000.0, 0.0)};
    const auto res = clear_market(funds, 10.0, 0.0, 10.0);
    CHECK(res.price == doctest::Approx(50.0).epsilon(1e-10));
    CHECK(res.residual <= 1e-8);
}

TEST_CASE("clearing matches the share-holding closed form") {
    // 0.5 * (1000 + 10 p) / p = 10  =>  p = 100.
    std::vector<Fund> funds{committed_fund(0.5, 1000.0, 10.0)};
    const auto res = clear_market(funds, 10.0, 0.0, 10.0);
    CHECK(res.price == doctest::Approx(100.0).epsilon(1e-10));
    CHECK(res.residual <= 1e-8);
}

TEST_CASE("clearing starting far from the root still lands on it") {
    std::vector<Fund> funds{committed_fund(0.5, 1000.0, 10.0)};
    for (double start : {1e-6, 0.1, 42.0, 1e5}) {
        const auto res = clear_market(funds, 10.0, 0.0, start);
        CHECK(res.price == doctest::Approx(100.0).epsilon(1e-10));
    }
}

TEST_CASE("no demand means no clearing price") {
    std::vector<Fund> funds{committed_fund(0.0, 1000.0, 0.0)};
    CHECK_THROWS_AS(clear_market(funds, 10.0, 0.0, 10.0), NoBracketError);
    try {
        clear_market(funds, 10.0, 0.0, 10.0);
    } catch (const NoBracketError& e) {
        CHECK(!e.samples.empty());
    }
}

TEST_CASE("administrator inventory shifts the cleared price") {
    // 0.5 * 1000 / p = 10 - 2  =>  p = 62.5 with 2 shares held back.
    std::vector<Fund> funds{committed_fund(0.5, 1000.0, 0.0)};
    const auto res = clear_market(funds, 10.0, 2.0, 10.0);
    CHECK(res.price == doctest::Approx(62.5).epsilon(1e-10));
}

TEST_CASE("mixed value funds clear with tiny residual") {
    std::vector<Fund> funds;
    for (int i = 0; i < 10; ++i) {
        funds.push_back(value_fund(80.0 + 5.0 * i, 500.0 + 100.0 * i, 10.0));
    }
    const double q = 100.0;
    const auto res = clear_market(funds, q, 0.0, 50.0);
    double total = 0.0;
    for (const Fund& f : funds) {
        total += fund_target(f, res.price);
    }
    CHECK(std::abs(total - q) / q <= 1e-10);
}

TEST_CASE("value-fund target is non-increasing in price") {
    Fund f = value_fund(100.0, 1000.0, 5.0);
    double prev = fund_target(f, 1.0);
    for (double p = 1.5; p < 400.0; p *= 1.5) {
        const double cur = fund_target(f, p);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("execution books the cash leg and reports half turnover") {
    std::vector<Fund> funds{committed_fund(0.5, 1000.0, 0.0),
                            value_fund(100.0, 0.0, 10.0, 1e-12)};
    // Second fund's signal ~ 0, so it sells everything; first fund buys.
    const auto res = clear_market(funds, 10.0, 0.0, 10.0);
    std::vector<double> before_cash{funds[0].cash, funds[1].cash};
    const auto exec = execute_orders(funds, res.price, 0.0);
    CHECK(funds[0].shares + funds[1].shares == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(funds[0].cash ==
          doctest::Approx(before_cash[0] - res.price * funds[0].shares));
    CHECK(exec.volume == doctest::Approx(std::abs(funds[0].shares)).epsilon(1e-9));
    CHECK(exec.fund_cash_paid == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("inactive funds never trade") {
    Fund dead = committed_fund(1.0, 1000.0, 0.0);
    dead.active = false;
    CHECK(fund_target(dead, 10.0) == 0.0);
    std::vector<Fund> funds{committed_fund(0.5, 1000.0, 0.0), dead};
    const auto res = clear_market(funds, 10.0, 0.0, 10.0);
    CHECK(res.price == doctest::Approx(50.0).epsilon(1e-10));
    execute_orders(funds, res.price, 0.0);
    CHECK(funds[1].shares == 0.0);
    CHECK(funds[1].cash == 1000.0);
}
