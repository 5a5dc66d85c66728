#include "evology/random.hpp"

namespace evology {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master_seed, std::string_view stream_id) {
    return splitmix64(splitmix64(master_seed) ^ fnv1a(stream_id));
}

DividendProcess step_dividend(const DividendProcess& proc, double eps) {
    DividendProcess next = proc;
    next.shock = proc.rho * proc.shock + std::sqrt(1.0 - proc.rho * proc.rho) * eps;
    next.dividend = proc.dividend * std::exp(proc.growth + proc.sigma * next.shock);
    return next;
}

OuProcess step_ou(const OuProcess& proc, double eps) {
    const double log_mean = std::log(proc.mean);
    const double decay = std::exp(-proc.reversion);
    const double step_std =
        proc.sigma * std::sqrt((1.0 - decay * decay) / (2.0 * proc.reversion));
    const double y = log_mean + (std::log(proc.level) - log_mean) * decay + step_std * eps;
    OuProcess next = proc;
    next.level = std::exp(y);
    return next;
}

}  // namespace evology
