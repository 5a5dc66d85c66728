#include "evology/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace evology {

namespace {

using Eigen::ArrayXd;
using ConstMap = Eigen::Map<const ArrayXd>;

ConstMap as_array(std::span<const double> v) {
    return ConstMap(v.data(), static_cast<Eigen::Index>(v.size()));
}

double pearson(const ArrayXd& x, const ArrayXd& y) {
    const double mx = x.mean();
    const double my = y.mean();
    const ArrayXd dx = x - mx;
    const ArrayXd dy = y - my;
    const double denom = std::sqrt((dx * dx).sum() * (dy * dy).sum());
    if (denom == 0.0) {
        throw std::domain_error("correlation of a constant series");
    }
    return (dx * dy).sum() / denom;
}

}  // namespace

std::vector<double> log_returns(std::span<const double> prices, int horizon) {
    if (horizon < 1) {
        throw std::invalid_argument("log_returns horizon must be positive");
    }
    if (prices.size() <= static_cast<std::size_t>(horizon)) {
        throw std::invalid_argument("log_returns needs more prices than the horizon");
    }
    const std::size_t count = (prices.size() - 1) / static_cast<std::size_t>(horizon);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 1; k <= count; ++k) {
        const double now = prices[k * horizon];
        const double before = prices[(k - 1) * horizon];
        if (!(now > 0.0) || !(before > 0.0)) {
            throw std::domain_error("log_returns requires positive prices");
        }
        out.push_back(std::log(now) - std::log(before));
    }
    return out;
}

std::vector<double> acf(std::span<const double> series, int max_lag) {
    const auto n = static_cast<Eigen::Index>(series.size());
    if (max_lag < 0 || n <= max_lag + 1) {
        throw std::invalid_argument("acf needs a series longer than max_lag + 1");
    }
    const ConstMap x = as_array(series);
    const double mean = x.mean();
    const ArrayXd d = x - mean;
    const double c0 = (d * d).sum();
    if (c0 == 0.0) {
        throw std::domain_error("acf of a zero-variance series");
    }
    std::vector<double> out(static_cast<std::size_t>(max_lag) + 1);
    out[0] = 1.0;
    for (int k = 1; k <= max_lag; ++k) {
        const double ck = (d.head(n - k) * d.tail(n - k)).sum();
        out[static_cast<std::size_t>(k)] = ck / c0;
    }
    return out;
}

double acf_band(std::size_t n) { return 1.96 / std::sqrt(static_cast<double>(n)); }

double excess_kurtosis(std::span<const double> series) {
    if (series.size() < 4) {
        throw std::invalid_argument("excess_kurtosis needs at least 4 values");
    }
    const ConstMap x = as_array(series);
    const ArrayXd d = x - x.mean();
    const double m2 = (d * d).mean();
    if (m2 == 0.0) {
        throw std::domain_error("excess_kurtosis of a zero-variance series");
    }
    const double m4 = (d * d * d * d).mean();
    return m4 / (m2 * m2) - 3.0;
}

double skewness(std::span<const double> series) {
    if (series.size() < 3) {
        throw std::invalid_argument("skewness needs at least 3 values");
    }
    const ConstMap x = as_array(series);
    const ArrayXd d = x - x.mean();
    const double m2 = (d * d).mean();
    if (m2 == 0.0) {
        throw std::domain_error("skewness of a zero-variance series");
    }
    return (d * d * d).mean() / std::pow(m2, 1.5);
}

std::vector<double> rolling_volatility(std::span<const double> returns, int window) {
    if (window < 2) {
        throw std::invalid_argument("rolling_volatility window must be at least 2");
    }
    if (returns.size() < static_cast<std::size_t>(window)) {
        throw std::invalid_argument("rolling_volatility window exceeds the series");
    }
    const std::size_t n = returns.size();
    const std::size_t w = static_cast<std::size_t>(window);
    std::vector<double> out;
    out.reserve(n - w + 1);
    // Running sums keep this O(n); the two-pass variance form is recovered
    // from sum and sum of squares, stable enough for |r| ~ 1e-2 windows.
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        s += returns[i];
        s2 += returns[i] * returns[i];
    }
    const auto emit = [&] {
        const double mean = s / w;
        const double var = std::max(0.0, (s2 - w * mean * mean) / (w - 1.0));
        out.push_back(std::sqrt(var));
    };
    emit();
    for (std::size_t i = w; i < n; ++i) {
        s += returns[i] - returns[i - w];
        s2 += returns[i] * returns[i] - returns[i - w] * returns[i - w];
        emit();
    }
    return out;
}

const FactCheck* FactsReport::find(const std::string& name) const {
    for (const FactCheck& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

bool FactsReport::all_testable_pass() const {
    for (const FactCheck& c : checks) {
        if (c.has_threshold && !c.pass) {
            return false;
        }
    }
    return true;
}

namespace {

FactCheck insufficient(std::string name) {
    FactCheck c;
    c.name = std::move(name);
    c.statistic = 0.0;
    c.pass = false;
    c.note = "insufficient data";
    return c;
}

/// Mean run length of consecutive same-sign daily returns.
double mean_run_length(const std::vector<double>& returns, bool positive) {
    long runs = 0, days = 0, current = 0;
    for (double r : returns) {
        const bool in = positive ? r > 0.0 : r < 0.0;
        if (in) {
            ++current;
        } else if (current > 0) {
            ++runs;
            days += current;
            current = 0;
        }
    }
    if (current > 0) {
        ++runs;
        days += current;
    }
    return runs == 0 ? 0.0 : static_cast<double>(days) / runs;
}

}  // namespace

FactsReport facts_report(const RunRecord& run) {
    FactsReport report;
    const std::size_t n = run.price.size();

    std::vector<double> daily;
    if (n >= 2) {
        daily = log_returns(run.price, 1);
    }

    // (a) raw returns decorrelate after a few days
    {
        FactCheck c;
        c.name = "no-autocorrelation";
        c.threshold = 0.90;
        if (daily.size() < 200) {
            c = insufficient(c.name);
            c.threshold = 0.90;
        } else {
            const auto rho = acf(daily, 21);
            const double band = acf_band(daily.size());
            int inside = 0;
            for (int k = 6; k <= 21; ++k) {
                if (std::abs(rho[static_cast<std::size_t>(k)]) <= band) {
                    ++inside;
                }
            }
            c.statistic = inside / 16.0;
            c.pass = c.statistic >= c.threshold;
        }
        report.checks.push_back(c);
    }

    // (b) heavy tails of daily returns
    {
        FactCheck c;
        c.name = "heavy-tails";
        c.threshold = 0.0;
        if (daily.size() < 100) {
            c = insufficient(c.name);
        } else {
            c.statistic = excess_kurtosis(daily);
            c.pass = c.statistic > 0.0;
        }
        report.checks.push_back(c);
    }

    // (c) gain/loss asymmetry, descriptive: drawdowns resolve faster than
    // rallies when the ratio is below 1
    {
        FactCheck c;
        c.name = "gain-loss-asymmetry";
        c.has_threshold = false;
        if (daily.size() < 100) {
            c = insufficient(c.name);
            c.has_threshold = false;
        } else {
            const double down = mean_run_length(daily, false);
            const double up = mean_run_length(daily, true);
            c.statistic = up == 0.0 ? 0.0 : down / up;
            c.pass = true;
            c.note = "descriptive: mean down-run over up-run length";
        }
        report.checks.push_back(c);
    }

    // (d) aggregational Gaussianity: kurtosis falls with the horizon
    {
        FactCheck c;
        c.name = "aggregational-gaussianity";
        c.threshold = 0.0;
        if (n < 5 * 252 + 1) {
            c = insufficient(c.name);
        } else {
            const auto monthly = log_returns(run.price, 21);
            const auto yearly = log_returns(run.price, 252);
            const double kd = excess_kurtosis(daily);
            const double km = excess_kurtosis(monthly);
            const double ky = excess_kurtosis(yearly);
            c.statistic = kd - std::max(km, ky);
            c.pass = kd > km && km > ky;
            c.note = "daily " + std::to_string(kd) + ", monthly " + std::to_string(km) +
                     ", yearly " + std::to_string(ky);
        }
        report.checks.push_back(c);
    }

    // (e) intermittency, descriptive: dispersion of long-window volatility
    {
        FactCheck c;
        c.name = "intermittency";
        c.has_threshold = false;
        if (daily.size() < 2 * 1260) {
            c = insufficient(c.name);
            c.has_threshold = false;
        } else {
            const auto vol = rolling_volatility(daily, 1260);
            const ConstMap v = as_array(vol);
            const double mean = v.mean();
            const double sd = std::sqrt((v - mean).square().mean());
            c.statistic = mean == 0.0 ? 0.0 : sd / mean;
            c.pass = true;
            c.note = "descriptive: coefficient of variation of 5-year volatility";
        }
        report.checks.push_back(c);
    }

    // (f) volatility clustering: |returns| stay autocorrelated for weeks
    {
        FactCheck c;
        c.name = "volatility-clustering";
        c.threshold = 45.0;
        if (daily.size() < 500) {
            c = insufficient(c.name);
            c.threshold = 45.0;
        } else {
            std::vector<double> mag(daily.size());
            std::transform(daily.begin(), daily.end(), mag.begin(),
                           [](double r) { return std::abs(r); });
            const auto rho = acf(mag, 50);
            int positive = 0;
            for (int k = 1; k <= 50; ++k) {
                if (rho[static_cast<std::size_t>(k)] > 0.0) {
                    ++positive;
                }
            }
            c.statistic = positive;
            c.pass = positive >= 45;
        }
        report.checks.push_back(c);
    }

    // (g) leverage effect: returns against subsequent volatility
    {
        FactCheck c;
        c.name = "leverage-effect";
        c.threshold = 0.0;
        if (daily.size() < 300) {
            c = insufficient(c.name);
        } else {
            const auto vol = rolling_volatility(daily, 21);
            // Pair r(t) with the std of the 21 returns that follow it.
            const std::size_t pairs = daily.size() - 21;
            ArrayXd r(pairs), v(pairs);
            for (std::size_t t = 0; t < pairs; ++t) {
                r[static_cast<Eigen::Index>(t)] = daily[t];
                v[static_cast<Eigen::Index>(t)] = vol[t + 1];
            }
            c.statistic = pearson(r, v);
            c.pass = c.statistic < 0.0;
        }
        report.checks.push_back(c);
    }

    // (h) volume moves with volatility
    {
        FactCheck c;
        c.name = "volume-volatility-correlation";
        c.threshold = 0.1;
        if (daily.size() < 300 || run.volume.size() != n) {
            c = insufficient(c.name);
            c.threshold = 0.1;
        } else {
            const auto vol = rolling_volatility(daily, 21);
            // vol[i] covers returns [i, i+21) = days [i+1, i+21]; pair it
            // with the volume on the window's last day.
            const std::size_t m = vol.size();
            ArrayXd q(m), v(m);
            for (std::size_t i = 0; i < m; ++i) {
                q[static_cast<Eigen::Index>(i)] = run.volume[i + 21];
                v[static_cast<Eigen::Index>(i)] = vol[i];
            }
            c.statistic = pearson(q, v);
            c.pass = c.statistic > c.threshold;
        }
        report.checks.push_back(c);
    }

    // (i) aggregate short interest as a fraction of supply
    {
        FactCheck c;
        c.name = "short-ratio";
        c.threshold = 0.05;
        if (n == 0 || run.aggregate_short.size() != n ||
            run.total_shares.size() != n || run.admin_position.size() != n) {
            c = insufficient(c.name);
            c.threshold = 0.05;
        } else {
            const double supply = run.total_shares[0] + run.admin_position[0];
            const ConstMap shorts = as_array(run.aggregate_short);
            c.statistic = shorts.mean() / supply;
            c.pass = c.statistic >= 0.001 && c.statistic <= 0.05;
            c.note = "pass band [0.001, 0.05]";
        }
        report.checks.push_back(c);
    }

    return report;
}

nlohmann::json to_json(const FactsReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const FactCheck& c : report.checks) {
        nlohmann::json item = {{"name", c.name},
                               {"statistic", c.statistic},
                               {"pass", c.pass}};
        if (c.has_threshold) {
            item["threshold"] = c.threshold;
        } else {
            item["threshold"] = nullptr;
        }
        if (!c.note.empty()) {
            item["note"] = c.note;
        }
        checks.push_back(item);
    }
    return nlohmann::json{{"checks", checks}};
}

}  // namespace evology
