#include <doctest.h>

#include <string>

#include <nlohmann/json.hpp>

#include "evology/config.hpp"

using namespace evology;
using nlohmann::json;

TEST_CASE("empty document resolves to defaults") {
    const SimConfig c = parse_config(json::object());
    CHECK(c.population.n_nt == 204);
    CHECK(c.population.n_vi == 200);
    CHECK(c.population.n_tf == 200);
    CHECK(c.market.supply_q == doctest::Approx(1000.0));
    CHECK(c.market.interest_annual == doctest::Approx(0.01));
    CHECK(c.flows.enabled);
    CHECK(c.flows.intercept_annual == doctest::Approx(-0.024610));
    CHECK(c.flows.coef_10y == doctest::Approx(0.000053));
    CHECK(c.flows.period_days == 21);
    CHECK(c.solvency.liquidation_rate == doctest::Approx(0.05));
    CHECK(c.run.t_max_days == 2520);
    CHECK(c.run.master_seed == 0);
    CHECK(c.dividend.delta0 == doctest::Approx(0.003465));
    CHECK(c.ou.theta == doctest::Approx(2.5));
    CHECK(c.ou.sigma == doctest::Approx(0.65));
}

TEST_CASE("unknown keys are rejected with their full path") {
    const json doc = {{"processes", {{"dividend", {{"detla0", 0.5}}}}}};
    try {
        parse_config(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("processes.dividend.detla0") !=
              std::string::npos);
    }

    CHECK_THROWS_AS(parse_config(json{{"nonsense", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"market", {{"q", 5}}}}), ConfigError);
}

TEST_CASE("partial documents override only what they mention") {
    const json doc = {{"run", {{"t_max_days", 50}, {"master_seed", 7}}},
                      {"flows", {{"enabled", false}}}};
    const SimConfig c = parse_config(doc);
    CHECK(c.run.t_max_days == 50);
    CHECK(c.run.master_seed == 7);
    CHECK(!c.flows.enabled);
    CHECK(c.population.n_nt == 204);  // untouched default
}

TEST_CASE("resolved config round-trips") {
    json doc = {{"population", {{"n_nt", 3}, {"n_vi", 4}, {"n_tf", 5}}},
                {"market", {{"supply_q", 500.0}}},
                {"run", {{"master_seed", 42}}}};
    const SimConfig a = parse_config(doc);
    const SimConfig b = parse_config(to_json(a));
    CHECK(to_json(a) == to_json(b));
    CHECK(b.population.n_nt == 3);
    CHECK(b.market.supply_q == doctest::Approx(500.0));
    CHECK(b.run.master_seed == 42);
}

TEST_CASE("invalid values are named precisely") {
    auto check_fail = [](const json& doc, const std::string& needle) {
        try {
            parse_config(doc);
            FAIL("expected ConfigError for ", needle);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    check_fail({{"population", {{"initial_shares", {0.5, 0.2, 0.2}}}}},
               "initial_shares");
    check_fail({{"population", {{"initial_shares", {-0.2, 0.6, 0.6}}}}},
               "initial_shares");
    check_fail({{"market", {{"supply_q", -1.0}}}}, "supply_q");
    check_fail({{"market", {{"leverage", 0.5}}}}, "leverage");
    check_fail({{"processes", {{"dividend", {{"rho", 1.0}}}}}}, "rho");
    check_fail({{"processes", {{"ou", {{"theta", 0.0}}}}}}, "theta");
    check_fail({{"solvency", {{"liquidation_rate", 0.0}}}}, "liquidation_rate");
    check_fail({{"flows", {{"period_days", 0}}}}, "period_days");
    check_fail({{"run", {{"t_max_days", -1}}}}, "t_max_days");
    check_fail({{"population", {{"n_nt", -1}}}}, "population");
    check_fail({{"market", {{"supply_q", "big"}}}}, "supply_q");
}

TEST_CASE("boundary simplex points need funds in the funded styles") {
    const json ok = {{"population",
                      {{"n_nt", 2}, {"n_vi", 0}, {"n_tf", 0},
                       {"initial_shares", {1.0, 0.0, 0.0}}}}};
    CHECK_NOTHROW(parse_config(ok));

    const json bad = {{"population",
                       {{"n_nt", 0}, {"n_vi", 2}, {"n_tf", 0},
                        {"initial_shares", {1.0, 0.0, 0.0}}}}};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("discount range must clear the growth rate") {
    const json growth = {{"processes", {{"dividend", {{"growth_annual", 0.01}}}}}};
    json doc = growth;
    doc["population"] = {{"discount_rate_range", {0.009, 0.025}}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    json ok = growth;
    ok["population"] = {{"discount_rate_range", {0.011, 0.025}}};
    CHECK_NOTHROW(parse_config(ok));
}

TEST_CASE("zero-day runs are allowed") {
    const json doc = {{"run", {{"t_max_days", 0}}}};
    CHECK(parse_config(doc).run.t_max_days == 0);
}
