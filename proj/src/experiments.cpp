#include "evology/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "evology/csv.hpp"
#include "evology/random.hpp"

namespace evology {

std::vector<SimplexPoint> sample_simplex(int n, std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("sample_simplex: need at least one point");
    }
    Rng rng(seed, "simplex");
    std::vector<SimplexPoint> points;
    points.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Three unit exponentials normalised to sum 1 are flat on the simplex.
        double e[3];
        for (double& v : e) {
            v = -std::log1p(-rng.uniform());
        }
        const double sum = e[0] + e[1] + e[2];
        points.push_back({e[0] / sum, e[1] / sum, e[2] / sum});
    }
    return points;
}

WealthShareSummary terminal_wealth_share(const RunRecord& run, long window) {
    if (window < 1) {
        throw std::invalid_argument("terminal_wealth_share: window must be positive");
    }
    const long n = static_cast<long>(run.ws_nt.size());
    if (n == 0) {
        throw std::invalid_argument("terminal_wealth_share: empty run");
    }
    WealthShareSummary out;
    if (window > n) {
        window = n;
        out.truncated = true;
    }
    const std::size_t start = static_cast<std::size_t>(n - window);
    for (std::size_t t = start; t < static_cast<std::size_t>(n); ++t) {
        out.nt += run.ws_nt[t];
        out.vi += run.ws_vi[t];
        out.tf += run.ws_tf[t];
    }
    const double denom = static_cast<double>(window);
    out.nt /= denom;
    out.vi /= denom;
    out.tf /= denom;
    return out;
}

SweepResult run_sweep(const std::vector<SimplexPoint>& points, int reps, int years,
                      const SimConfig& base, int workers) {
    if (reps < 1) {
        throw std::invalid_argument("run_sweep: reps must be at least 1");
    }
    if (years < 1) {
        throw std::invalid_argument("run_sweep: years must be at least 1");
    }
    const long t_max = static_cast<long>(years) * 252;

    // Seeds hang off the point's exact coordinates and the repetition index,
    // so reordering the list or appending repetitions never reshuffles the
    // runs that already existed.
    auto run_label = [](const SimplexPoint& pt, int rep) {
        std::string label = "sweep:";
        for (double v : {pt.nt, pt.vi, pt.tf}) {
            label += std::to_string(std::bit_cast<std::uint64_t>(v)) + ":";
        }
        return label + std::to_string(rep);
    };

    std::vector<SimConfig> configs;
    configs.reserve(points.size() * static_cast<std::size_t>(reps));
    for (const SimplexPoint& pt : points) {
        for (int r = 0; r < reps; ++r) {
            SimConfig c = base;
            c.population.initial_shares = {pt.nt, pt.vi, pt.tf};
            c.run.t_max_days = t_max;
            c.run.master_seed = stream_seed(base.run.master_seed, run_label(pt, r));
            configs.push_back(std::move(c));
        }
    }

    const std::vector<RunRecord> records = run_ensemble(configs, workers);

    SweepResult out;
    out.window_days = std::min<long>(10000, t_max / 5);
    if (out.window_days < 1) {
        out.window_days = 1;
    }
    out.points.reserve(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        SweepPointResult row;
        row.point = points[p];
        std::vector<WealthShareSummary> summaries;
        for (int r = 0; r < reps; ++r) {
            const RunRecord& rec = records[p * static_cast<std::size_t>(reps) +
                                           static_cast<std::size_t>(r)];
            if (rec.failure || rec.days_completed < t_max) {
                row.failed += 1;
                continue;
            }
            summaries.push_back(terminal_wealth_share(rec, out.window_days));
            row.completed += 1;
        }
        if (!summaries.empty()) {
            for (const WealthShareSummary& s : summaries) {
                row.mean_nt += s.nt;
                row.mean_vi += s.vi;
                row.mean_tf += s.tf;
            }
            const double n = static_cast<double>(summaries.size());
            row.mean_nt /= n;
            row.mean_vi /= n;
            row.mean_tf /= n;
            for (const WealthShareSummary& s : summaries) {
                row.std_nt += (s.nt - row.mean_nt) * (s.nt - row.mean_nt);
                row.std_vi += (s.vi - row.mean_vi) * (s.vi - row.mean_vi);
                row.std_tf += (s.tf - row.mean_tf) * (s.tf - row.mean_tf);
            }
            row.std_nt = std::sqrt(row.std_nt / n);
            row.std_vi = std::sqrt(row.std_vi / n);
            row.std_tf = std::sqrt(row.std_tf / n);
        }
        out.points.push_back(row);
    }
    return out;
}

std::string sweep_csv(const SweepResult& result) {
    std::string out =
        "w_nt,w_vi,w_tf,mean_nt,mean_vi,mean_tf,std_nt,std_vi,std_tf,completed,failed\n";
    for (const SweepPointResult& row : result.points) {
        out += csv_double(row.point.nt) + ',' + csv_double(row.point.vi) + ',' +
               csv_double(row.point.tf) + ',' + csv_double(row.mean_nt) + ',' +
               csv_double(row.mean_vi) + ',' + csv_double(row.mean_tf) + ',' +
               csv_double(row.std_nt) + ',' + csv_double(row.std_vi) + ',' +
               csv_double(row.std_tf) + ',' + std::to_string(row.completed) + ',' +
               std::to_string(row.failed) + '\n';
    }
    return out;
}

}  // namespace evology
