#include <doctest.h>

#include <cmath>
#include <vector>

#include "evology/engine.hpp"

using namespace evology;

namespace {

SimConfig small_config() {
    SimConfig c;
    c.population.n_nt = 3;
    c.population.n_vi = 3;
    c.population.n_tf = 3;
    c.run.t_max_days = 120;
    c.flows.enabled = false;
    return c;
}

}  // namespace

TEST_CASE("initialization splits wealth by the simplex point") {
    SimConfig c = small_config();
    Simulation sim(c);
    const auto& funds = sim.funds();
    CHECK(funds.size() == 9);

    double shares_total = 0.0;
    for (const Fund& f : funds) {
        shares_total += f.shares;
    }
    CHECK(shares_total == doctest::Approx(c.market.supply_q).epsilon(1e-12));

    const double total = sim.total_wealth();
    CHECK(sim.style_wealth(Style::NoiseTrader) ==
          doctest::Approx(total / 3.0).epsilon(1e-9));
    CHECK(sim.style_wealth(Style::ValueInvestor) ==
          doctest::Approx(total / 3.0).epsilon(1e-9));
    CHECK(sim.style_wealth(Style::TrendFollower) ==
          doctest::Approx(total / 3.0).epsilon(1e-9));
    CHECK(total == doctest::Approx(c.population.initial_wealth_multiple *
                                   c.market.supply_q * sim.price())
                       .epsilon(1e-9));

    // Initial price is the share-weighted mean of value-based valuations.
    double weighted = 0.0, weight = 0.0;
    for (const Fund& f : funds) {
        if (f.style == Style::TrendFollower) {
            continue;
        }
        weighted += f.valuation / 3.0;
        weight += 1.0 / 3.0;
    }
    CHECK(sim.price() == doctest::Approx(weighted / weight).epsilon(1e-12));
}

TEST_CASE("boundary simplex point funds only one style") {
    SimConfig c = small_config();
    c.population.initial_shares = {1.0, 0.0, 0.0};
    Simulation sim(c);
    CHECK(sim.style_wealth(Style::NoiseTrader) ==
          doctest::Approx(sim.total_wealth()).epsilon(1e-12));
    CHECK(sim.style_wealth(Style::ValueInvestor) == doctest::Approx(0.0));
    for (const Fund& f : sim.funds()) {
        if (f.style != Style::NoiseTrader) {
            CHECK(f.shares == 0.0);
            CHECK(f.cash == 0.0);
        }
    }
    // Zero-wealth styles never trade but the market still clears.
    RunRecord rec = sim.run();
    CHECK(!rec.failure);
    CHECK(rec.days_completed == 120);
}

TEST_CASE("same config yields identical initial state and run") {
    const SimConfig c = small_config();
    Simulation a(c);
    Simulation b(c);
    for (std::size_t i = 0; i < a.funds().size(); ++i) {
        CHECK(a.funds()[i].cash == b.funds()[i].cash);
        CHECK(a.funds()[i].discount_rate == b.funds()[i].discount_rate);
        CHECK(a.funds()[i].horizon == b.funds()[i].horizon);
    }
    const RunRecord ra = a.run();
    const RunRecord rb = b.run();
    REQUIRE(ra.price.size() == rb.price.size());
    bool identical = true;
    for (std::size_t i = 0; i < ra.price.size(); ++i) {
        identical = identical && ra.price[i] == rb.price[i] &&
                    ra.volume[i] == rb.volume[i] && ra.ws_vi[i] == rb.ws_vi[i];
    }
    CHECK(identical);
}

TEST_CASE("daily conservation and bookkeeping identities hold") {
    SimConfig c = small_config();
    c.run.t_max_days = 250;
    Simulation sim(c);
    RunRecord rec = sim.run();
    REQUIRE(!rec.failure);
    REQUIRE(rec.days_completed == 250);

    const double q = c.market.supply_q;
    for (long t = 0; t < rec.days_completed; ++t) {
        // Share conservation: fund holdings plus administrator inventory.
        CHECK(std::abs(rec.total_shares[t] + rec.admin_position[t] - q) <= 1e-9);
        // Wealth shares sum to one.
        CHECK(std::abs(rec.ws_nt[t] + rec.ws_vi[t] + rec.ws_tf[t] - 1.0) <= 1e-9);
        // Cash identity: today's change is interest plus dividends minus
        // cash handed to the administrator, minus insolvency write-offs.
        const double prev = t == 0 ? 2.0 * q * rec.price[0] : rec.total_cash[t - 1];
        double expected = rec.interest_paid[t] + rec.dividends_paid[t] -
                          rec.admin_proceeds[t] - rec.written_off[t] +
                          rec.flow_total[t];
        if (t > 0) {
            CHECK(rec.total_cash[t] - rec.total_cash[t - 1] ==
                  doctest::Approx(expected).epsilon(1e-9));
        }
        (void)prev;
    }
}

TEST_CASE("a noiseless homogeneous market drifts up toward its valuation") {
    // Identical value investors only: every fund starts at its target, so no
    // shares ever change hands; dividend cash then pushes the fixed point up
    // a little each day, and the price can approach (never reach) the shared
    // valuation only as wealth grows without bound.
    SimConfig c;
    c.population.n_nt = 0;
    c.population.n_vi = 4;
    c.population.n_tf = 0;
    c.population.initial_shares = {0.0, 1.0, 0.0};
    c.population.discount_rate_range = {0.02, 0.02};
    c.dividend.growth_annual = 0.0;
    c.dividend.sigma_daily = 0.0;
    c.ou.sigma = 0.0;
    c.market.interest_annual = 0.0;
    c.flows.enabled = false;
    c.run.t_max_days = 2000;
    Simulation sim(c);
    RunRecord rec = sim.run();
    REQUIRE(!rec.failure);

    const double v = kTradingDaysPerYear * c.dividend.delta0 / 0.02;
    double prev = 0.0;
    for (long t = 0; t < rec.days_completed; ++t) {
        CHECK(rec.price[t] < v);
        if (t > 0) {
            CHECK(rec.price[t] > prev);
        }
        CHECK(rec.volume[t] <= 1e-9);
        prev = rec.price[t];
    }
    const auto& p = rec.price;
    CHECK(p.back() > p.front());
    CHECK(std::abs(p.back() - p[p.size() - 2]) / p.back() < 1e-4);
    // The gap to the valuation shrinks but survives any finite horizon.
    CHECK(v - p.back() < v - p.front());
    CHECK(p.back() < v);
}

TEST_CASE("zero-day run yields an empty record") {
    SimConfig c = small_config();
    c.run.t_max_days = 0;
    Simulation sim(c);
    RunRecord rec = sim.run();
    CHECK(!rec.failure);
    CHECK(rec.days_completed == 0);
    CHECK(rec.price.empty());
}

TEST_CASE("trend-followers alone cannot set a price") {
    SimConfig c;
    c.population.n_nt = 0;
    c.population.n_vi = 0;
    c.population.n_tf = 3;
    c.population.initial_shares = {0.0, 0.0, 1.0};
    CHECK_THROWS_AS(Simulation{c}, ConfigError);
}

TEST_CASE("vanishing aggression leaves demand short of supply") {
    SimConfig c = small_config();
    c.market.aggression = 1e-300;
    Simulation sim(c);
    RunRecord rec = sim.run();
    REQUIRE(rec.failure);
    CHECK(rec.failure_day == 0);
    CHECK(rec.failure->find("initial placement") != std::string::npos);
}

TEST_CASE("ensembles are order-stable and isolate failures") {
    std::vector<SimConfig> configs;
    for (int i = 0; i < 6; ++i) {
        SimConfig c = small_config();
        c.run.t_max_days = 40;
        c.run.master_seed = static_cast<std::uint64_t>(i);
        configs.push_back(c);
    }
    configs[3].market.aggression = 1e-300;  // fails on day 0

    const auto seq = run_ensemble(configs, 1);
    const auto par = run_ensemble(configs, 4);
    REQUIRE(seq.size() == 6);
    REQUIRE(par.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(seq[i].failure.has_value() == par[i].failure.has_value());
        REQUIRE(seq[i].price.size() == par[i].price.size());
        bool identical = true;
        for (std::size_t t = 0; t < seq[i].price.size(); ++t) {
            identical = identical && seq[i].price[t] == par[i].price[t];
        }
        CHECK(identical);
    }
    CHECK(seq[3].failure.has_value());
    CHECK(!seq[2].failure.has_value());

    CHECK(run_ensemble({}, 4).empty());
}

TEST_CASE("fund panel records end-of-day positions when requested") {
    SimConfig c = small_config();
    c.run.t_max_days = 5;
    Simulation sim(c, true);
    RunRecord rec = sim.run();
    REQUIRE(!rec.failure);
    CHECK(rec.fund_panel.size() == 5 * 9);
    const auto& row = rec.fund_panel.front();
    CHECK(row.day == 0);
    CHECK(row.fund_id == 0);
    CHECK(row.style == Style::NoiseTrader);
    CHECK(std::abs(row.wealth - (row.cash + rec.price[0] * row.shares)) < 1e-9);
}

TEST_CASE("adaptive funds trade the committed signal") {
    SimConfig c = small_config();
    Simulation sim(c);
    const int id = sim.add_adaptive_fund(0.1);
    const double before = sim.total_wealth();
    sim.set_adaptive_signal(id, 0.7);
    sim.step_day();
    const Fund* adaptive = nullptr;
    for (const Fund& f : sim.funds()) {
        if (f.id == id) {
            adaptive = &f;
        }
    }
    REQUIRE(adaptive != nullptr);
    CHECK(adaptive->style == Style::Adaptive);
    CHECK(adaptive->bounded_signal == doctest::Approx(0.7));
    // Holds 0.7 of its wealth in stock after the trade (up to the day's
    // small dividend/interest accrual on top of the executed positions).
    const double w = adaptive->cash + sim.price() * adaptive->shares;
    CHECK(sim.price() * adaptive->shares == doctest::Approx(0.7 * w).epsilon(1e-3));
    CHECK(before > 0.0);
}

TEST_CASE("a weightless adaptive fund leaves the market untouched") {
    SimConfig c = small_config();
    c.run.t_max_days = 120;

    Simulation base(c);
    const RunRecord plain = base.run();
    REQUIRE(!plain.failure);

    Simulation watched(c);
    const int id = watched.add_adaptive_fund(0.0);
    for (long t = 0; t < c.run.t_max_days; ++t) {
        watched.set_adaptive_signal(id, (t % 2 == 0) ? 0.9 : -0.9);
        watched.step_day();
    }
    const RunRecord shadowed = watched.take_record();

    REQUIRE(shadowed.price.size() == plain.price.size());
    for (std::size_t t = 0; t < plain.price.size(); ++t) {
        CHECK(shadowed.price[t] == plain.price[t]);  // bit identical
        CHECK(shadowed.volume[t] == plain.volume[t]);
    }

    CHECK_THROWS_AS(base.add_adaptive_fund(-0.01), ConfigError);
    CHECK_THROWS_AS(base.add_adaptive_fund(1.0), ConfigError);
}
