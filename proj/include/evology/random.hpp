#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace evology {

/// Mixes a master seed and a stream label into a 64-bit engine seed.
/// Distinct labels (or distinct master seeds) give unrelated streams, so a
/// simulation can hand every stochastic process its own generator and the
/// draws of one process never depend on how many other processes exist.
std::uint64_t stream_seed(std::uint64_t master_seed, std::string_view stream_id);

/// Seedable random stream with explicit uniform/normal mappings.
///
/// std::normal_distribution is implementation-defined, so we draw normals
/// ourselves (Marsaglia polar) on top of mt19937_64, whose output is fully
/// specified by the standard. Identical (seed, call sequence) therefore
/// reproduces identical draws on any platform.
class Rng {
  public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t master_seed, std::string_view stream_id)
        : engine_(stream_seed(master_seed, stream_id)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi], both ends inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1u;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    /// Standard normal draw (Marsaglia polar method).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Dividend process: geometric growth with an AR(1) log shock.
/// delta' = delta * exp(growth + sigma * u'),  u' = rho*u + sqrt(1-rho^2)*eps.
struct DividendProcess {
    double dividend = 0.003465;  ///< currency per share per day
    double growth = 0.0;         ///< per-day log growth rate
    double sigma = 0.0;          ///< per-day shock scale
    double rho = 0.0;            ///< AR(1) autocorrelation of the shock, in [0,1)
    double shock = 0.0;          ///< current AR(1) carrier u
};

DividendProcess step_dividend(const DividendProcess& proc, double eps);

/// Mean-reverting sentiment level, Ornstein-Uhlenbeck on ln(level) so the
/// level stays positive. Uses the exact one-step transition, not Euler, so
/// the stationary variance sigma^2/(2*theta) holds for any step size.
struct OuProcess {
    double level = 1.0;      ///< X, dimensionless, > 0
    double mean = 1.0;       ///< long-run level mu, > 0
    double reversion = 0.01; ///< theta, per day, > 0
    double sigma = 0.03;     ///< per day
};

OuProcess step_ou(const OuProcess& proc, double eps);

}  // namespace evology
