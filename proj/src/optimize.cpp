#include "evology/optimize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "evology/accounting.hpp"
#include "evology/csv.hpp"
#include "evology/random.hpp"

namespace evology {

Measure parse_measure(const std::string& name) {
    if (name == "sharpe") {
        return Measure::SharpeDaily;
    }
    if (name == "sharpe_annualized") {
        return Measure::SharpeAnnualized;
    }
    if (name == "wealth_multiplier") {
        return Measure::WealthMultiplier;
    }
    if (name == "cumulative_return") {
        return Measure::CumulativeReturn;
    }
    throw ConfigError("unknown measure: " + name +
                      " (expected sharpe, sharpe_annualized, wealth_multiplier or "
                      "cumulative_return)");
}

std::string measure_name(Measure measure) {
    switch (measure) {
        case Measure::SharpeDaily: return "sharpe";
        case Measure::SharpeAnnualized: return "sharpe_annualized";
        case Measure::WealthMultiplier: return "wealth_multiplier";
        case Measure::CumulativeReturn: return "cumulative_return";
    }
    return "?";
}

std::optional<double> sharpe(std::span<const double> returns, bool annualize,
                             double periods_per_year) {
    if (returns.size() < 2) {
        return std::nullopt;
    }
    double log_sum = 0.0;
    double mean = 0.0;
    for (double r : returns) {
        if (!(1.0 + r > 0.0)) {
            return std::nullopt;  // geometric mean undefined past a wipeout
        }
        log_sum += std::log1p(r);
        mean += r;
    }
    const double n = static_cast<double>(returns.size());
    mean /= n;
    double ss = 0.0;
    for (double r : returns) {
        ss += (r - mean) * (r - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    // Constant returns have no risk to divide by. The tolerance catches
    // series that are constant up to accumulated rounding, where sd is a
    // pure float artifact and the ratio would explode to ~1e15.
    if (sd <= std::abs(mean) * 1e-9) {
        return std::nullopt;
    }
    const double geometric = std::expm1(log_sum / n);
    const double value = geometric / sd;
    return annualize ? value * std::sqrt(periods_per_year) : value;
}

double wealth_multiplier(std::span<const double> wealth_path) {
    if (wealth_path.size() < 2) {
        throw std::invalid_argument("wealth_multiplier: need at least two points");
    }
    if (!(wealth_path.front() > 0.0)) {
        throw std::domain_error("wealth_multiplier: starting wealth must be positive");
    }
    return wealth_path.back() / wealth_path.front();
}

double cumulative_return(std::span<const double> wealth_path) {
    return wealth_multiplier(wealth_path) - 1.0;
}

std::optional<double> path_measure(std::span<const double> wealth_path,
                                   Measure measure) {
    if (wealth_path.size() < 2 || !(wealth_path.front() > 0.0)) {
        return std::nullopt;
    }
    switch (measure) {
        case Measure::WealthMultiplier:
            return wealth_multiplier(wealth_path);
        case Measure::CumulativeReturn:
            return cumulative_return(wealth_path);
        case Measure::SharpeDaily:
        case Measure::SharpeAnnualized: {
            std::vector<double> returns;
            returns.reserve(wealth_path.size() - 1);
            for (std::size_t t = 0; t + 1 < wealth_path.size(); ++t) {
                if (!(wealth_path[t] > 0.0)) {
                    return std::nullopt;
                }
                returns.push_back(wealth_path[t + 1] / wealth_path[t] - 1.0);
            }
            return sharpe(returns, measure == Measure::SharpeAnnualized);
        }
    }
    return std::nullopt;
}

namespace {

// The fund may be gone (insolvent, its slot recycled); that reads as zero.
std::optional<double> fund_wealth_by_id(const Simulation& sim, int id) {
    for (const Fund& f : sim.funds()) {
        if (f.id == id) {
            return f.active ? wealth(f, sim.price()) : 0.0;
        }
    }
    return std::nullopt;
}

}  // namespace

EpisodeResult evaluate_schedule(const SignalSchedule& schedule, const TradingEnv& env,
                                Measure measure) {
    const long t_max = env.config.run.t_max_days;
    if (static_cast<long>(schedule.values.size()) != t_max) {
        throw std::invalid_argument("evaluate_schedule: schedule needs one entry per day (" +
                                    std::to_string(t_max) + ")");
    }
    for (double v : schedule.values) {
        if (!(v >= -1.0 && v <= 1.0)) {
            throw std::invalid_argument(
                "evaluate_schedule: schedule entries must lie in [-1, 1]");
        }
    }

    Simulation sim(env.config);
    const int id = sim.add_adaptive_fund(env.adaptive_share);

    EpisodeResult out;
    out.wealth_path.push_back(fund_wealth_by_id(sim, id).value_or(0.0));
    for (long t = 0; t < t_max; ++t) {
        sim.set_adaptive_signal(id, schedule.values[static_cast<std::size_t>(t)]);
        try {
            sim.step_day();
        } catch (const std::exception& e) {
            out.feasible = false;
            out.note = e.what();
            return out;
        }
        const std::optional<double> w = fund_wealth_by_id(sim, id);
        out.wealth_path.push_back(w.value_or(0.0));
        if (!w || !(*w > 0.0)) {
            out.note = "fund wiped out on day " + std::to_string(t);
            break;
        }
    }

    const std::optional<double> value = path_measure(out.wealth_path, measure);
    if (!value) {
        out.feasible = false;
        if (out.note.empty()) {
            out.note = "measure undefined on the wealth path";
        }
        return out;
    }
    out.measure = *value;
    return out;
}

namespace {

double lagged_unit_return(const std::vector<double>& history, long lag) {
    const long n = static_cast<long>(history.size());
    if (n < 2) {
        return 0.0;
    }
    const double base =
        n - 1 > lag ? history[static_cast<std::size_t>(n - 1 - lag)] : history.front();
    return base > 0.0 ? history.back() / base - 1.0 : 0.0;
}

}  // namespace

EpisodeResult evaluate_investor(const InvestorPolicy& policy, const InvestorEnv& env,
                                Measure measure) {
    if (!(env.budget_per_period > 0.0)) {
        throw std::invalid_argument("evaluate_investor: budget must be positive");
    }
    if (!(env.initial_cash > 0.0)) {
        throw std::invalid_argument("evaluate_investor: initial cash must be positive");
    }

    Simulation sim(env.config);
    const long t_max = env.config.run.t_max_days;
    const double r_d = env.config.daily_interest();
    const int period = env.config.flows.period_days;

    // Unit accounting per fund id: baseline flows mint or burn anonymous
    // units at the pre-flow unit value, so unit value tracks pure
    // performance and the investor's stake is never diluted by other money.
    std::unordered_map<int, double> total_units;
    std::unordered_map<int, double> my_units;
    std::unordered_map<int, std::vector<double>> unit_value;
    for (const Fund& f : sim.funds()) {
        total_units[f.id] = 1.0;
        unit_value[f.id] = {wealth(f, sim.price())};
    }

    double cash = env.initial_cash;
    EpisodeResult out;
    out.wealth_path.push_back(cash);

    for (long t = 0; t < t_max; ++t) {
        try {
            sim.step_day();
        } catch (const std::exception& e) {
            out.feasible = false;
            out.note = e.what();
            return out;
        }

        std::unordered_map<int, double> wealth_now;
        for (const Fund& f : sim.funds()) {
            if (f.active) {
                wealth_now[f.id] = wealth(f, sim.price());
            }
        }
        // A parent that split after the flow still has a well-defined
        // post-flow wealth: its children's combined end-of-day wealth
        // (nothing trades between the flow and the split).
        const auto& splits = sim.last_splits();
        for (auto it = splits.rbegin(); it != splits.rend(); ++it) {
            double combined = 0.0;
            if (auto a = wealth_now.find(it->child_a); a != wealth_now.end()) {
                combined += a->second;
            }
            if (auto b = wealth_now.find(it->child_b); b != wealth_now.end()) {
                combined += b->second;
            }
            wealth_now[it->parent_id] = combined;
        }

        for (const auto& [id, flow] : sim.last_flows()) {
            const auto units = total_units.find(id);
            const auto w = wealth_now.find(id);
            if (units == total_units.end() || w == wealth_now.end()) {
                continue;
            }
            if (w->second > 0.0 && w->second - flow > 0.0) {
                units->second *= w->second / (w->second - flow);
            }
        }

        for (const SplitEvent& s : splits) {
            const auto units = total_units.find(s.parent_id);
            if (units == total_units.end()) {
                continue;
            }
            const double half = units->second / 2.0;
            total_units.erase(units);
            total_units[s.child_a] = half;
            total_units[s.child_b] = half;
            if (const auto mine = my_units.find(s.parent_id); mine != my_units.end()) {
                const double stake = mine->second / 2.0;
                my_units.erase(mine);
                my_units[s.child_a] = stake;
                my_units[s.child_b] = stake;
            }
            auto history = unit_value.find(s.parent_id);
            unit_value[s.child_a] = history->second;
            unit_value[s.child_b] = std::move(history->second);
            unit_value.erase(s.parent_id);
        }

        // Whatever is tracked but no longer trading went insolvent; those
        // units are written off with the fund.
        std::unordered_set<int> active_ids;
        for (const Fund& f : sim.funds()) {
            if (f.active) {
                active_ids.insert(f.id);
            }
        }
        for (auto it = total_units.begin(); it != total_units.end();) {
            if (active_ids.count(it->first) == 0) {
                my_units.erase(it->first);
                unit_value.erase(it->first);
                it = total_units.erase(it);
            } else {
                ++it;
            }
        }

        for (const auto& [id, units] : total_units) {
            unit_value[id].push_back(wealth_now.at(id) / units);
        }

        cash *= 1.0 + r_d;
        double holdings = 0.0;
        for (const auto& [id, units] : my_units) {
            holdings += units * unit_value.at(id).back();
        }
        out.wealth_path.push_back(cash + holdings);

        if ((t + 1) % period == 0 && t + 1 < t_max) {
            std::vector<FundFeatures> features;
            features.reserve(total_units.size());
            for (const Fund& f : sim.funds()) {
                if (!f.active) {
                    continue;
                }
                const std::vector<double>& history = unit_value.at(f.id);
                FundFeatures x;
                x.fund_id = f.id;
                x.style = f.style;
                x.tna = wealth_now.at(f.id);
                x.r_1m = lagged_unit_return(history, 21);
                x.r_1y = lagged_unit_return(history, 252);
                x.r_10y = lagged_unit_return(history, 2520);
                features.push_back(x);
            }

            const auto allocations = policy(features, cash, env.budget_per_period);
            double gross = 0.0;
            for (const auto& [id, amount] : allocations) {
                gross += std::abs(amount);
            }
            if (gross > env.budget_per_period * (1.0 + 1e-12)) {
                out.feasible = false;
                out.note = "policy exceeded the period budget on day " + std::to_string(t);
                return out;
            }
            for (const auto& [id, amount] : allocations) {
                const auto units = total_units.find(id);
                if (units == total_units.end()) {
                    out.feasible = false;
                    out.note = "policy allocated to unknown fund " + std::to_string(id);
                    return out;
                }
                const double uv = unit_value.at(id).back();
                if (!(uv > 0.0)) {
                    continue;
                }
                double executed = amount;
                if (executed > 0.0) {
                    executed = std::min(executed, cash);
                } else {
                    executed = -std::min(-executed, my_units[id] * uv);
                }
                if (executed == 0.0) {
                    continue;
                }
                my_units[id] = std::max(0.0, my_units[id] + executed / uv);
                units->second = std::max(0.0, units->second + executed / uv);
                cash -= executed;
                sim.external_flow(id, executed);
            }
        }
    }

    const std::optional<double> value = path_measure(out.wealth_path, measure);
    if (!value) {
        out.feasible = false;
        out.note = "measure undefined on the portfolio path";
        return out;
    }
    out.measure = *value;
    return out;
}

InvestorPolicy null_policy() {
    return [](const std::vector<FundFeatures>&, double, double) {
        return std::vector<std::pair<int, double>>{};
    };
}

InvestorPolicy chase_best_1y_policy() {
    return [](const std::vector<FundFeatures>& funds, double cash, double budget) {
        std::vector<std::pair<int, double>> orders;
        const FundFeatures* best = nullptr;
        for (const FundFeatures& f : funds) {
            if (!(f.tna > 0.0)) {
                continue;
            }
            if (best == nullptr || f.r_1y > best->r_1y ||
                (f.r_1y == best->r_1y && f.fund_id < best->fund_id)) {
                best = &f;
            }
        }
        const double amount = std::min(budget, cash);
        if (best != nullptr && amount > 0.0) {
            orders.emplace_back(best->fund_id, amount);
        }
        return orders;
    };
}

std::uint64_t candidate_hash(std::span<const double> values) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the raw bits
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    return h;
}

namespace {

void clamp_into_bounds(Candidate& c) {
    for (std::size_t j = 0; j < c.values.size(); ++j) {
        c.values[j] = std::clamp(c.values[j], c.lower[j], c.upper[j]);
    }
}

std::vector<std::optional<double>> evaluate_batch(
    const Objective& objective, const std::vector<std::vector<double>>& batch,
    int workers) {
    std::vector<std::optional<double>> results(batch.size());
    if (workers <= 1 || batch.size() <= 1) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            results[i] = objective(batch[i]);
        }
        return results;
    }
    std::vector<std::exception_ptr> errors(batch.size());
    std::vector<std::thread> pool;
    pool.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        pool.emplace_back([&, i] {
            try {
                results[i] = objective(batch[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    for (const std::exception_ptr& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return results;
}

}  // namespace

SearchResult optimize_search(const Objective& objective, Candidate initial,
                             int budget, std::uint64_t seed, SearchMode mode,
                             int workers) {
    if (budget < 1) {
        throw std::invalid_argument("optimize_search: budget must be at least 1");
    }
    const std::size_t dim = initial.values.size();
    if (dim == 0 || initial.lower.size() != dim || initial.upper.size() != dim) {
        throw std::invalid_argument("optimize_search: candidate needs matching bounds");
    }
    for (std::size_t j = 0; j < dim; ++j) {
        if (!(initial.lower[j] <= initial.upper[j])) {
            throw std::invalid_argument("optimize_search: lower bound above upper");
        }
    }
    clamp_into_bounds(initial);

    Rng rng(seed, "search");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    SearchResult out;
    out.best = initial;
    out.trace.reserve(static_cast<std::size_t>(budget));

    bool has_best = false;
    double best_measure = nan;
    auto record = [&](const std::vector<double>& values, std::optional<double> m) {
        out.evaluations += 1;
        if (m && (!has_best || *m > best_measure)) {
            has_best = true;
            best_measure = *m;
            out.best.values = values;
            return true;
        }
        return false;
    };
    auto trace_row = [&](const std::vector<double>& values, std::optional<double> m) {
        out.trace.push_back({out.evaluations, candidate_hash(values),
                             m ? *m : nan, has_best ? best_measure : nan});
    };

    {
        const std::optional<double> m = objective(initial.values);
        record(initial.values, m);
        trace_row(initial.values, m);
    }

    // Per-entry scale: a quarter of each box width, shrunk or grown by a
    // 1/5-style success rule.
    std::vector<double> base_scale(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        base_scale[j] = (initial.upper[j] - initial.lower[j]) / 4.0;
        if (base_scale[j] == 0.0) {
            base_scale[j] = 0.25;
        }
    }
    double step = 1.0;
    constexpr int lambda = 4;
    const double keep_probability =
        mode == SearchMode::Dynamic ? std::min(1.0, 8.0 / static_cast<double>(dim)) : 1.0;

    while (out.evaluations < budget) {
        const int children =
            std::min(lambda, budget - out.evaluations);
        const std::vector<double>& anchor = out.best.values;
        std::vector<std::vector<double>> batch;
        batch.reserve(static_cast<std::size_t>(children));
        for (int c = 0; c < children; ++c) {
            std::vector<double> child = anchor;
            bool touched = false;
            for (std::size_t j = 0; j < dim; ++j) {
                if (keep_probability < 1.0 && rng.uniform() >= keep_probability) {
                    continue;
                }
                child[j] = std::clamp(child[j] + step * base_scale[j] * rng.normal(),
                                      initial.lower[j], initial.upper[j]);
                touched = true;
            }
            if (!touched) {
                const auto j = static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(dim) - 1));
                child[j] = std::clamp(child[j] + step * base_scale[j] * rng.normal(),
                                      initial.lower[j], initial.upper[j]);
            }
            batch.push_back(std::move(child));
        }

        const auto results = evaluate_batch(objective, batch, workers);
        bool improved = false;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            improved = record(batch[i], results[i]) || improved;
            trace_row(batch[i], results[i]);
        }
        step = std::clamp(improved ? step * 1.6 : step * 0.8, 1e-6, 1e3);
    }

    if (!has_best) {
        throw std::runtime_error("optimize_search: every evaluation was infeasible");
    }
    out.best_measure = best_measure;
    return out;
}

std::string trace_csv(const std::vector<SearchTraceRow>& trace) {
    std::string out = "eval,candidate_hash,measure,best_so_far\n";
    for (const SearchTraceRow& row : trace) {
        out += std::to_string(row.evaluation) + ',' + std::to_string(row.candidate_hash) +
               ',' + csv_double(row.measure) + ',' + csv_double(row.best_so_far) + '\n';
    }
    return out;
}

}  // namespace evology
