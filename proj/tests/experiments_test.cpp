#include <doctest.h>

#include <cmath>
#include <sstream>

#include "evology/experiments.hpp"

using namespace evology;

namespace {

SimConfig sweep_config() {
    SimConfig c;
    c.population.n_nt = 3;
    c.population.n_vi = 3;
    c.population.n_tf = 3;
    c.flows.enabled = false;
    return c;
}

}  // namespace

TEST_CASE("simplex samples are uniform and reproducible") {
    const auto points = sample_simplex(100000, 42);
    REQUIRE(points.size() == 100000);
    double mean_nt = 0.0, mean_vi = 0.0, mean_tf = 0.0;
    for (const SimplexPoint& p : points) {
        CHECK(p.nt >= 0.0);
        CHECK(p.vi >= 0.0);
        CHECK(p.tf >= 0.0);
        CHECK(p.nt + p.vi + p.tf == doctest::Approx(1.0).epsilon(1e-12));
        mean_nt += p.nt;
        mean_vi += p.vi;
        mean_tf += p.tf;
    }
    CHECK(mean_nt / 100000 == doctest::Approx(1.0 / 3.0).epsilon(0.03));
    CHECK(mean_vi / 100000 == doctest::Approx(1.0 / 3.0).epsilon(0.03));
    CHECK(mean_tf / 100000 == doctest::Approx(1.0 / 3.0).epsilon(0.03));

    const auto again = sample_simplex(100000, 42);
    bool identical = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        identical = identical && points[i].nt == again[i].nt &&
                    points[i].vi == again[i].vi && points[i].tf == again[i].tf;
    }
    CHECK(identical);

    const auto other = sample_simplex(10, 43);
    CHECK(other[0].nt != points[0].nt);

    CHECK_THROWS(sample_simplex(0, 1));
}

TEST_CASE("terminal wealth share oracle points") {
    RunRecord rec;
    for (int t = 0; t < 100; ++t) {
        rec.ws_nt.push_back(0.2);
        rec.ws_vi.push_back(0.7);
        rec.ws_tf.push_back(0.1);
    }
    rec.days_completed = 100;

    const auto constant = terminal_wealth_share(rec, 50);
    CHECK(constant.nt == doctest::Approx(0.2));
    CHECK(constant.vi == doctest::Approx(0.7));
    CHECK(constant.tf == doctest::Approx(0.1));
    CHECK(!constant.truncated);

    // Degenerate window picks the final day alone.
    rec.ws_nt.back() = 0.5;
    rec.ws_vi.back() = 0.4;
    rec.ws_tf.back() = 0.1;
    const auto last = terminal_wealth_share(rec, 1);
    CHECK(last.nt == doctest::Approx(0.5));
    CHECK(last.vi == doctest::Approx(0.4));

    // Linear NT drift 0 -> 0.2 across the window averages to its midpoint.
    RunRecord ramp;
    const int w = 201;
    for (int t = 0; t < w; ++t) {
        const double x = 0.2 * t / (w - 1.0);
        ramp.ws_nt.push_back(x);
        ramp.ws_vi.push_back(1.0 - x);
        ramp.ws_tf.push_back(0.0);
    }
    ramp.days_completed = w;
    const auto mid = terminal_wealth_share(ramp, w);
    CHECK(mid.nt == doctest::Approx(0.1).epsilon(1e-12));

    const auto short_run = terminal_wealth_share(rec, 1000);
    CHECK(short_run.truncated);
    CHECK_THROWS(terminal_wealth_share(RunRecord{}, 10));
    CHECK_THROWS(terminal_wealth_share(rec, 0));
}

TEST_CASE("sweep aggregates completed runs deterministically") {
    const std::vector<SimplexPoint> points{{0.4, 0.4, 0.2}, {0.2, 0.5, 0.3}};
    const SimConfig base = sweep_config();

    const SweepResult serial = run_sweep(points, 2, 1, base, 1);
    const SweepResult parallel = run_sweep(points, 2, 1, base, 8);
    REQUIRE(serial.points.size() == 2);
    REQUIRE(parallel.points.size() == 2);
    for (std::size_t p = 0; p < 2; ++p) {
        const auto& a = serial.points[p];
        const auto& b = parallel.points[p];
        CHECK(a.mean_nt == b.mean_nt);
        CHECK(a.mean_vi == b.mean_vi);
        CHECK(a.mean_tf == b.mean_tf);
        CHECK(a.std_nt == b.std_nt);
        CHECK(a.completed == 2);
        CHECK(a.failed == 0);
        CHECK(a.mean_nt + a.mean_vi + a.mean_tf == doctest::Approx(1.0).epsilon(1e-6));
    }

    // Window scales with the run: a one-year run keeps the final 20%.
    CHECK(serial.window_days == 50);

    // Reordering the points permutes the rows and nothing else.
    const std::vector<SimplexPoint> swapped{points[1], points[0]};
    const SweepResult reordered = run_sweep(swapped, 2, 1, base, 3);
    CHECK(reordered.points[0].mean_vi == serial.points[1].mean_vi);
    CHECK(reordered.points[1].mean_nt == serial.points[0].mean_nt);
}

TEST_CASE("single rep sweep has zero dispersion") {
    const std::vector<SimplexPoint> points{{0.3, 0.5, 0.2}};
    const SweepResult result = run_sweep(points, 1, 1, sweep_config(), 1);
    REQUIRE(result.points.size() == 1);
    CHECK(result.points[0].completed == 1);
    CHECK(result.points[0].std_nt == 0.0);
    CHECK(result.points[0].std_vi == 0.0);
    CHECK(result.points[0].std_tf == 0.0);

    CHECK_THROWS(run_sweep(points, 0, 1, sweep_config(), 1));
    CHECK_THROWS(run_sweep(points, 1, 0, sweep_config(), 1));
}

TEST_CASE("impossible points are counted as failures") {
    // A trend-followers-only market has no value anchor: every rep fails,
    // the sweep itself survives.
    const std::vector<SimplexPoint> points{{0.0, 0.0, 1.0}, {0.3, 0.4, 0.3}};
    const SweepResult result = run_sweep(points, 2, 1, sweep_config(), 2);
    CHECK(result.points[0].completed == 0);
    CHECK(result.points[0].failed == 2);
    CHECK(result.points[1].completed == 2);
}

TEST_CASE("sweep csv has the documented header") {
    const std::vector<SimplexPoint> points{{0.3, 0.5, 0.2}};
    const SweepResult result = run_sweep(points, 1, 1, sweep_config(), 1);
    const std::string csv = sweep_csv(result);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "w_nt,w_vi,w_tf,mean_nt,mean_vi,mean_tf,std_nt,std_vi,std_tf,completed,failed");
    std::string row;
    std::getline(lines, row);
    CHECK(row.find("0.3,0.5,0.2,") == 0);
    CHECK(row.substr(row.size() - 4) == ",1,0");
}
