#include <doctest.h>

#include <cmath>

#include "evology/fund.hpp"

using namespace evology;

TEST_CASE("flat-dividend valuation is dividend over discount rate") {
    // 1 currency per year paid daily, no growth, 2% discount -> 50.
    const double v = value_asset(1.0 / 252.0, 0.0, 0.02);
    CHECK(v == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("growing-dividend valuation follows the growth formula") {
    // Annual growth 1%: value = 1 * 1.01 / (0.02 - 0.01) = 101.
    const double g = std::log(1.01) / 252.0;
    const double v = value_asset(1.0 / 252.0, g, 0.02);
    CHECK(v == doctest::Approx(101.0).epsilon(1e-12));
}

TEST_CASE("zero dividend values at zero") {
    CHECK(value_asset(0.0, 0.0, 0.02) == doctest::Approx(0.0));
}

TEST_CASE("discount rate at or below growth is rejected") {
    const double g = std::log(1.02) / 252.0;
    CHECK_THROWS_AS(value_asset(1.0 / 252.0, g, 0.02), ConfigError);
    CHECK_THROWS_AS(value_asset(1.0 / 252.0, g, 0.015), ConfigError);
}

TEST_CASE("value signal oracle points") {
    CHECK(signal_vi(10.0, 10.0) == doctest::Approx(0.0));
    CHECK(signal_vi(20.0, 10.0) == doctest::Approx(1.0));
    CHECK(signal_vi(100.0, 80.0) == doctest::Approx(0.321928).epsilon(1e-5));
    CHECK_THROWS_AS(signal_vi(0.0, 10.0), std::domain_error);
    CHECK_THROWS_AS(signal_vi(10.0, 0.0), std::domain_error);
}

TEST_CASE("value signal is scale invariant and antisymmetric") {
    for (double c : {0.5, 2.0, 17.0}) {
        CHECK(signal_vi(c * 100.0, c * 80.0) ==
              doctest::Approx(signal_vi(100.0, 80.0)).epsilon(1e-12));
    }
    CHECK(signal_vi(100.0, 80.0) == doctest::Approx(-signal_vi(80.0, 100.0)));
}

TEST_CASE("sentiment signal oracle points") {
    CHECK(signal_nt(1.0, 100.0, 80.0) ==
          doctest::Approx(signal_vi(100.0, 80.0)).epsilon(1e-12));
    CHECK(signal_nt(2.0, 10.0, 10.0) == doctest::Approx(1.0));
    CHECK(signal_nt(0.8, 100.0, 100.0) == doctest::Approx(-0.321928).epsilon(1e-5));
    CHECK_THROWS_AS(signal_nt(0.0, 100.0, 80.0), std::domain_error);
}

TEST_CASE("trend signal oracle points") {
    CHECK(signal_tf(10.0, 10.0) == doctest::Approx(0.0));
    CHECK(signal_tf(20.0, 10.0) == doctest::Approx(1.0));
    CHECK(signal_tf(110.0, 100.0) == doctest::Approx(0.137504).epsilon(1e-5));
    CHECK_THROWS_AS(signal_tf(0.0, 10.0), std::domain_error);
}

TEST_CASE("style names are stable") {
    CHECK(to_string(Style::NoiseTrader) == "NT");
    CHECK(to_string(Style::ValueInvestor) == "VI");
    CHECK(to_string(Style::TrendFollower) == "TF");
    CHECK(to_string(Style::Adaptive) == "ADAPTIVE");
}
