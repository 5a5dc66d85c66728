#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evology/config.hpp"
#include "evology/engine.hpp"

namespace evology {

// A point on the 2-simplex of initial wealth shares.
struct SimplexPoint {
    double nt = 0.0;
    double vi = 0.0;
    double tf = 0.0;
};

// i.i.d. uniform points on the simplex (normalised exponential draws),
// deterministic per seed.
std::vector<SimplexPoint> sample_simplex(int n, std::uint64_t seed);

struct WealthShareSummary {
    double nt = 0.0;
    double vi = 0.0;
    double tf = 0.0;
    bool truncated = false;  // run was shorter than the requested window
};

// Time-average of the daily per-style wealth shares over the final `window`
// days; a shorter run is averaged whole and flagged.
WealthShareSummary terminal_wealth_share(const RunRecord& run, long window);

struct SweepPointResult {
    SimplexPoint point;
    double mean_nt = 0.0;
    double mean_vi = 0.0;
    double mean_tf = 0.0;
    double std_nt = 0.0;
    double std_vi = 0.0;
    double std_tf = 0.0;
    int completed = 0;
    int failed = 0;
};

struct SweepResult {
    std::vector<SweepPointResult> points;
    long window_days = 0;
};

// For every simplex point, runs `reps` simulations of `years` trading years
// with derived per-run seeds and aggregates terminal wealth shares over the
// runs that finished.  Failed runs are counted, never fatal.
SweepResult run_sweep(const std::vector<SimplexPoint>& points, int reps, int years,
                      const SimConfig& base, int workers);

std::string sweep_csv(const SweepResult& result);

}  // namespace evology
