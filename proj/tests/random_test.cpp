#include <doctest.h>

#include <cmath>
#include <vector>

#include "evology/random.hpp"

using namespace evology;

TEST_CASE("streams are reproducible and distinct") {
    Rng a(0, "dividend");
    Rng b(0, "dividend");
    bool all_equal = true;
    for (int i = 0; i < 100; ++i) {
        all_equal = all_equal && a.next_u64() == b.next_u64();
    }
    CHECK(all_equal);

    Rng c(0, "dividend");
    Rng d(0, "ou:nt:17");
    Rng e(1, "dividend");
    bool id_differs = false;
    bool seed_differs = false;
    const std::uint64_t first = Rng(0, "dividend").next_u64();
    for (int i = 0; i < 10; ++i) {
        if (c.next_u64() != d.next_u64()) id_differs = true;
    }
    CHECK(id_differs);
    for (int i = 0; i < 10; ++i) {
        Rng f(0, "dividend");
        if (f.next_u64() != e.next_u64()) seed_differs = true;
    }
    CHECK(seed_differs);
    CHECK(first == Rng(0, "dividend").next_u64());
}

TEST_CASE("uniform draws live in [0,1) and cover it") {
    Rng rng(123);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo < 0.001);
    CHECK(hi > 0.999);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("uniform_int covers both endpoints") {
    Rng rng(7);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 10000; ++i) {
        const auto v = rng.uniform_int(5, 252);
        CHECK(v >= 5);
        CHECK(v <= 252);
        saw_lo = saw_lo || v == 5;
        saw_hi = saw_hi || v == 252;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
}

TEST_CASE("normal draws have unit moments") {
    Rng rng(99);
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.0).epsilon(0.01));
    CHECK(std::abs(mean) < 0.01);
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("degenerate dividend process is constant") {
    DividendProcess p{1.0, 0.0, 0.0, 0.0, 0.0};
    p = step_dividend(p, 1.7);
    CHECK(p.dividend == doctest::Approx(1.0));
}

TEST_CASE("noiseless dividend compounds to annual growth") {
    DividendProcess p{1.0, std::log(1.02) / 252.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < 252; ++i) {
        p = step_dividend(p, -0.3);
    }
    CHECK(p.dividend == doctest::Approx(1.02).epsilon(1e-12));
}

TEST_CASE("shock carrier follows AR(1)") {
    DividendProcess p{1.0, 0.0, 0.0, 0.9, 1.0};
    p = step_dividend(p, 0.0);
    CHECK(p.shock == doctest::Approx(0.9));
}

TEST_CASE("dividend stays positive over a long noisy run") {
    DividendProcess p{0.003465, std::log(1.01) / 252.0, 0.01, 0.1, 0.0};
    Rng rng(0, "dividend");
    double lowest = p.dividend;
    for (int i = 0; i < 1000000; ++i) {
        p = step_dividend(p, rng.normal());
        lowest = std::min(lowest, p.dividend);
    }
    CHECK(lowest > 0.0);
}

TEST_CASE("shock carrier lag-1 autocorrelation matches rho") {
    DividendProcess p{1.0, 0.0, 0.01, 0.1, 0.0};
    Rng rng(4);
    const int n = 1000000;
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
        p = step_dividend(p, rng.normal());
        u[i] = p.shock;
    }
    double mean = 0.0;
    for (double x : u) mean += x;
    mean /= n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        den += (u[i] - mean) * (u[i] - mean);
        if (i > 0) num += (u[i] - mean) * (u[i - 1] - mean);
    }
    CHECK(num / den == doctest::Approx(0.1).epsilon(0.2));
    CHECK(std::abs(num / den - 0.1) < 0.02);
}

TEST_CASE("sentiment process fixes its mean") {
    OuProcess p{1.0, 1.0, 0.01, 0.03};
    p = step_ou(p, 0.0);
    CHECK(p.level == doctest::Approx(1.0));
}

TEST_CASE("noiseless sentiment decays at the exact rate") {
    OuProcess p{std::exp(1.0), 1.0, std::log(2.0), 0.0};
    p = step_ou(p, 2.5);
    CHECK(p.level == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("noiseless sentiment converges monotonically") {
    OuProcess p{4.0, 1.0, 0.05, 0.0};
    double prev = p.level;
    for (int i = 0; i < 500; ++i) {
        p = step_ou(p, 0.0);
        CHECK(p.level < prev);
        CHECK(p.level > 1.0);
        prev = p.level;
    }
    CHECK(p.level == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("sentiment stationary spread matches theory within 5%") {
    OuProcess p{1.0, 1.0, 0.01, 0.03};
    Rng rng(0, "ou:nt:0");
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    double lowest = p.level;
    for (int i = 0; i < n; ++i) {
        p = step_ou(p, rng.normal());
        const double y = std::log(p.level);
        sum += y;
        sq += y * y;
        lowest = std::min(lowest, p.level);
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    const double expected = 0.03 / std::sqrt(2.0 * 0.01);
    CHECK(sd == doctest::Approx(expected).epsilon(0.05));
    CHECK(lowest > 0.0);
}
