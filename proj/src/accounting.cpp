#include "evology/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace evology {

double wealth(const Fund& fund, double price) {
    if (!(price > 0.0)) {
        throw std::domain_error("wealth requires a positive price");
    }
    return fund.cash + price * fund.shares - fund.loans;
}

void accrue(Fund& fund, double dividend, double daily_interest) {
    fund.cash = fund.cash * (1.0 + daily_interest) + dividend * fund.shares;
}

std::vector<double> excess_returns(std::span<const double> returns,
                                   std::span<const double> weights) {
    if (returns.size() != weights.size()) {
        throw std::invalid_argument("excess_returns: size mismatch");
    }
    double weight_sum = 0.0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        if (weights[i] < 0.0) {
            throw std::invalid_argument("excess_returns: negative weight");
        }
        weight_sum += weights[i];
        weighted += weights[i] * returns[i];
    }
    if (weight_sum <= 0.0) {
        throw std::invalid_argument("excess_returns: weights sum to zero");
    }
    const double benchmark = weighted / weight_sum;
    std::vector<double> out(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) {
        out[i] = returns[i] - benchmark;
    }
    return out;
}

std::vector<double> apply_flows(std::span<Fund> funds, const FlowModel& model,
                                double price) {
    constexpr int kTenYears = 2520;
    const std::size_t n = funds.size();
    std::vector<double> flows(n, 0.0);
    std::vector<double> measure(n, 0.0);
    std::vector<double> weight(n, 0.0);
    std::vector<char> eligible(n, 0);

    for (std::size_t i = 0; i < n; ++i) {
        const Fund& f = funds[i];
        if (!f.active) {
            continue;
        }
        const double now = wealth(f, price);
        if (!(now > 0.0)) {
            continue;
        }
        const auto& h = f.wealth_history;
        if (h.size() >= kTenYears) {
            const double then = h[h.size() - kTenYears];
            if (then > 0.0) {
                measure[i] = now / then - 1.0;
                eligible[i] = 1;
            }
        } else if (!h.empty() && h.front() > 0.0) {
            // Annualised since-inception return stands in until a full
            // 10-year window exists.
            const double exponent = kTradingDaysPerYear / static_cast<double>(h.size());
            measure[i] = std::pow(now / h.front(), exponent) - 1.0;
            eligible[i] = 1;
        }
        weight[i] = now;
    }

    double weight_sum = 0.0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (eligible[i]) {
            weight_sum += weight[i];
            weighted += weight[i] * measure[i];
        }
    }
    if (weight_sum <= 0.0) {
        return flows;
    }
    const double benchmark = weighted / weight_sum;

    const double period_fraction = model.period_days / kTradingDaysPerYear;
    for (std::size_t i = 0; i < n; ++i) {
        if (!eligible[i]) {
            continue;
        }
        const double excess_pct = 100.0 * (measure[i] - benchmark);
        const double annual = annual_flow_fraction(model, excess_pct);
        const double flow = weight[i] * annual * period_fraction;
        funds[i].cash += flow;
        flows[i] = flow;
    }
    return flows;
}

SolvencySummary check_solvency(std::span<Fund> funds, double price,
                               InsolvencyLedger& ledger) {
    SolvencySummary summary;
    for (Fund& f : funds) {
        if (!f.active) {
            continue;
        }
        if (wealth(f, price) < 0.0) {
            f.active = false;
            ledger.admin_position += f.shares;
            ledger.vacancy_count += 1;
            summary.funds_removed += 1;
            summary.shares_absorbed += f.shares;
            summary.cash_written_off += f.cash;
            f.shares = 0.0;
            f.cash = 0.0;
            f.loans = 0.0;
        }
    }
    return summary;
}

double administer_liquidation(const InsolvencyLedger& ledger, double rate) {
    constexpr double kFlush = 1e-6;
    const double position = ledger.admin_position;
    if (position == 0.0) {
        return 0.0;
    }
    if (std::abs(position) <= kFlush) {
        return position;
    }
    double sell = rate * position;
    if (std::abs(position - sell) < kFlush) {
        sell = position;
    }
    return sell;
}

int split_wealthiest(std::vector<Fund>& funds, InsolvencyLedger& ledger, double price,
                     SplitContext& ctx) {
    int splits = 0;
    while (ledger.vacancy_count > 0) {
        const Fund* richest = nullptr;
        for (const Fund& f : funds) {
            if (!f.active) {
                continue;
            }
            if (!(wealth(f, price) > 0.0)) {
                continue;
            }
            if (richest == nullptr || wealth(f, price) > wealth(*richest, price) ||
                (wealth(f, price) == wealth(*richest, price) && f.id < richest->id)) {
                richest = &f;
            }
        }
        if (richest == nullptr) {
            throw TotalCollapseError("no solvent fund remains to split");
        }

        auto make_child = [&](const Fund& parent) {
            Fund child = parent;
            child.id = ctx.next_fund_id++;
            child.cash = parent.cash / 2.0;
            child.shares = parent.shares / 2.0;
            child.loans = parent.loans / 2.0;
            child.wealth_history.clear();
            child.initial_wealth = wealth(child, price);
            if (child.style == Style::NoiseTrader) {
                child.sentiment_rng =
                    Rng(ctx.master_seed, "ou:split:" + std::to_string(ctx.split_counter++));
            }
            return child;
        };

        const std::size_t parent_slot =
            static_cast<std::size_t>(richest - funds.data());
        std::size_t vacant_slot = funds.size();
        for (std::size_t i = 0; i < funds.size(); ++i) {
            if (!funds[i].active) {
                vacant_slot = i;
                break;
            }
        }
        if (vacant_slot == funds.size()) {
            throw std::logic_error("vacancy_count positive but no inactive slot");
        }

        const Fund parent = funds[parent_slot];
        funds[parent_slot] = make_child(parent);
        funds[vacant_slot] = make_child(parent);
        ctx.events.push_back(
            {parent.id, funds[parent_slot].id, funds[vacant_slot].id});
        ledger.vacancy_count -= 1;
        splits += 1;
    }
    return splits;
}

}  // namespace evology
