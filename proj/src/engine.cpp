#include "evology/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace evology {

Simulation::Simulation(const SimConfig& config, bool record_fund_panel)
    : config_(config), record_fund_panel_(record_fund_panel) {
    validate(config_);
    initialize();
}

void Simulation::initialize() {
    const auto& pop = config_.population;
    const double g = config_.daily_dividend_growth();

    dividend_ = DividendProcess{config_.dividend.delta0, config_.dividend_log_drift(),
                                config_.dividend.sigma_daily, config_.dividend.rho, 0.0};
    dividend_rng_ = Rng(config_.run.master_seed, "dividend");

    Rng het_nt(config_.run.master_seed, "het:nt");
    Rng het_vi(config_.run.master_seed, "het:vi");
    Rng het_tf(config_.run.master_seed, "het:tf");

    const int counts[3] = {pop.n_nt, pop.n_vi, pop.n_tf};
    const Style styles[3] = {Style::NoiseTrader, Style::ValueInvestor,
                             Style::TrendFollower};
    funds_.clear();
    int id = 0;
    for (int s = 0; s < 3; ++s) {
        for (int i = 0; i < counts[s]; ++i, ++id) {
            Fund f;
            f.id = id;
            f.style = styles[s];
            f.leverage = config_.market.leverage;
            f.aggression = config_.market.aggression;
            switch (styles[s]) {
                case Style::NoiseTrader:
                    f.discount_rate = het_nt.uniform(pop.discount_rate_range[0],
                                                     pop.discount_rate_range[1]);
                    f.sentiment = OuProcess{config_.ou.mu, config_.ou.mu,
                                            config_.ou.theta, config_.ou.sigma};
                    f.sentiment_rng =
                        Rng(config_.run.master_seed, "ou:nt:" + std::to_string(i));
                    break;
                case Style::ValueInvestor:
                    f.discount_rate = het_vi.uniform(pop.discount_rate_range[0],
                                                     pop.discount_rate_range[1]);
                    break;
                case Style::TrendFollower:
                    f.horizon = static_cast<int>(het_tf.uniform_int(
                        pop.horizon_range[0], pop.horizon_range[1]));
                    break;
                default:
                    break;
            }
            funds_.push_back(std::move(f));
        }
    }

    // Initial price: wealth-weighted mean of the value-based funds'
    // valuations, with weights given by the configured style split.
    double weighted_value = 0.0;
    double weight_sum = 0.0;
    double plain_value = 0.0;
    int valued = 0;
    for (Fund& f : funds_) {
        if (f.style != Style::NoiseTrader && f.style != Style::ValueInvestor) {
            continue;
        }
        f.valuation = value_asset(dividend_.dividend, g, f.discount_rate);
        const int s = f.style == Style::NoiseTrader ? 0 : 1;
        const double frac = pop.initial_shares[s] / counts[s];
        weighted_value += frac * f.valuation;
        weight_sum += frac;
        plain_value += f.valuation;
        ++valued;
    }
    double p0;
    if (weight_sum > 0.0) {
        p0 = weighted_value / weight_sum;
    } else if (valued > 0) {
        p0 = plain_value / valued;
    } else {
        throw ConfigError("initial price requires at least one value-based fund");
    }

    // Wealth per fund from the style simplex point, split equally within a
    // style; shares seeded pro-rata to wealth so fund holdings sum to the
    // supply, the remainder held as cash.
    const double q = config_.market.supply_q;
    const double total_wealth = pop.initial_wealth_multiple * q * p0;
    for (Fund& f : funds_) {
        const int s = f.style == Style::NoiseTrader ? 0
                      : f.style == Style::ValueInvestor ? 1
                                                        : 2;
        const double frac = pop.initial_shares[s] / counts[s];
        f.shares = frac * q;
        f.cash = frac * total_wealth - p0 * f.shares;
        f.initial_wealth = frac * total_wealth;
    }

    ledger_ = InsolvencyLedger{0.0, config_.solvency.liquidation_rate, 0};
    split_ctx_ = SplitContext{config_.run.master_seed, id, 0, {}};
    price_ = p0;
    price_history_.assign(1, p0);
    day_ = 0;
    placed_ = false;
}

void Simulation::place_initial_positions() {
    // One untracked clearing round before the first day. The seeded price is
    // a valuation mark, not a traded price; funds were handed shares pro rata
    // to wealth, not to their own demand. Letting them trade to target once
    // before the clock starts means the recorded series opens at the market's
    // own equilibrium: day 0 carries no repricing cliff, and trend followers
    // never see a price jump that no trading produced. Trades settle at one
    // price, so the configured wealth split across styles is preserved.
    compute_signals();
    ClearingResult clearing;
    try {
        clearing = clear_market(funds_, config_.market.supply_q, ledger_.admin_position,
                                price_, config_.market.clearing_tol);
    } catch (NoBracketError& e) {
        throw NoBracketError(std::string("initial placement: ") + e.what(),
                             std::move(e.samples));
    }
    execute_orders(funds_, clearing.price, 0.0);
    price_ = clearing.price;
    price_history_.assign(1, price_);
    for (Fund& f : funds_) {
        if (f.active) {
            f.initial_wealth = wealth(f, price_);
        }
    }
}

void Simulation::compute_signals() {
    const double g = config_.daily_dividend_growth();
    for (Fund& f : funds_) {
        if (!f.active) {
            continue;
        }
        switch (f.style) {
            case Style::NoiseTrader:
                f.valuation = value_asset(dividend_.dividend, g, f.discount_rate);
                f.value_estimate = f.sentiment.level * f.valuation;
                f.price_sensitive = true;
                break;
            case Style::ValueInvestor:
                f.valuation = value_asset(dividend_.dividend, g, f.discount_rate);
                f.value_estimate = f.valuation;
                f.price_sensitive = true;
                break;
            case Style::TrendFollower: {
                double phi = 0.0;
                if (day_ >= f.horizon - 1) {
                    const double lag1 = price_history_[day_];
                    const double lag_h = price_history_[day_ - f.horizon + 1];
                    phi = signal_tf(lag1, lag_h);
                }
                f.fixed_bounded = smooth_signal(phi, f.aggression);
                f.price_sensitive = false;
                break;
            }
            case Style::Adaptive: {
                double bounded = 0.0;
                if (auto it = adaptive_signals_.find(f.id);
                    it != adaptive_signals_.end()) {
                    bounded = std::clamp(it->second, -1.0, 1.0);
                }
                f.fixed_bounded = bounded;
                f.price_sensitive = false;
                break;
            }
        }
    }
}

double Simulation::fundamental_value() const {
    double weighted = 0.0;
    double weight_sum = 0.0;
    double plain = 0.0;
    int valued = 0;
    for (const Fund& f : funds_) {
        if (!f.active ||
            (f.style != Style::NoiseTrader && f.style != Style::ValueInvestor)) {
            continue;
        }
        const double w = std::max(wealth(f, price_), 0.0);
        weighted += w * f.valuation;
        weight_sum += w;
        plain += f.valuation;
        ++valued;
    }
    if (weight_sum > 0.0) {
        return weighted / weight_sum;
    }
    return valued > 0 ? plain / valued : 0.0;
}

void Simulation::step_day() {
    if (!placed_) {
        place_initial_positions();
        placed_ = true;
    }

    // (1) exogenous processes
    dividend_ = step_dividend(dividend_, dividend_rng_.normal());
    for (Fund& f : funds_) {
        if (f.active && f.style == Style::NoiseTrader) {
            f.sentiment = step_ou(f.sentiment, f.sentiment_rng.normal());
        }
    }

    // (2) trading signals
    compute_signals();

    // (3)+(4) demand, clearing, execution
    const double admin_sell = administer_liquidation(ledger_, ledger_.liquidation_rate);
    const double admin_remaining = ledger_.admin_position - admin_sell;
    ClearingResult clearing;
    try {
        clearing = clear_market(funds_, config_.market.supply_q, admin_remaining,
                                price_, config_.market.clearing_tol);
    } catch (NoBracketError& e) {
        throw NoBracketError("day " + std::to_string(day_) + ": " + e.what(),
                             std::move(e.samples));
    }
    const ExecutionSummary exec = execute_orders(funds_, clearing.price, admin_sell);
    ledger_.admin_position = admin_remaining;
    price_ = clearing.price;
    price_history_.push_back(price_);

    // (5) dividends and interest on post-trade positions
    const double r_d = config_.daily_interest();
    double interest = 0.0;
    double dividends = 0.0;
    for (Fund& f : funds_) {
        if (!f.active) {
            continue;
        }
        interest += f.cash * r_d;
        dividends += dividend_.dividend * f.shares;
        accrue(f, dividend_.dividend, r_d);
    }

    // (6) investor flows on their cadence
    std::vector<double> fund_flows(funds_.size(), 0.0);
    double flow_sum = 0.0;
    last_flows_.clear();
    if (config_.flows.enabled && (day_ + 1) % config_.flows.period_days == 0) {
        const FlowModel model{config_.flows.intercept_annual, config_.flows.coef_10y,
                              config_.flows.period_days};
        fund_flows = apply_flows(funds_, model, price_);
        for (std::size_t i = 0; i < fund_flows.size(); ++i) {
            flow_sum += fund_flows[i];
            if (fund_flows[i] != 0.0) {
                last_flows_.emplace_back(funds_[i].id, fund_flows[i]);
            }
        }
    }

    // (7) solvency, administration handoff, splits
    const SolvencySummary solvency = check_solvency(funds_, price_, ledger_);
    const std::size_t splits_seen = split_ctx_.events.size();
    if (ledger_.vacancy_count > 0) {
        try {
            split_wealthiest(funds_, ledger_, price_, split_ctx_);
        } catch (const TotalCollapseError& e) {
            throw TotalCollapseError("day " + std::to_string(day_) + ": " + e.what());
        }
    }
    last_splits_.assign(split_ctx_.events.begin() + static_cast<long>(splits_seen),
                        split_ctx_.events.end());

    // (8) records
    append_records(clearing, admin_sell, exec, interest, dividends, flow_sum,
                   solvency.cash_written_off, fund_flows);
    for (Fund& f : funds_) {
        if (f.active) {
            f.wealth_history.push_back(wealth(f, price_));
        }
    }
    ++day_;
}

void Simulation::append_records(const ClearingResult& clearing, double admin_sell,
                                const ExecutionSummary& exec, double interest,
                                double dividends, double flow_sum, double written_off,
                                const std::vector<double>& fund_flows) {
    record_.price.push_back(price_);
    record_.fundamental.push_back(fundamental_value());
    record_.dividend.push_back(dividend_.dividend);
    record_.volume.push_back(exec.volume);

    double style_w[3] = {0.0, 0.0, 0.0};
    double total_w = 0.0;
    double cash = 0.0;
    double shares = 0.0;
    double short_sum = 0.0;
    for (const Fund& f : funds_) {
        if (!f.active) {
            continue;
        }
        const double w = wealth(f, price_);
        if (w > 0.0) {
            total_w += w;
            switch (f.style) {
                case Style::NoiseTrader: style_w[0] += w; break;
                case Style::ValueInvestor: style_w[1] += w; break;
                case Style::TrendFollower: style_w[2] += w; break;
                case Style::Adaptive: break;
            }
        }
        cash += f.cash;
        shares += f.shares;
        short_sum += std::max(-f.shares, 0.0);
    }
    const double denom = total_w > 0.0 ? total_w : 1.0;
    record_.ws_nt.push_back(style_w[0] / denom);
    record_.ws_vi.push_back(style_w[1] / denom);
    record_.ws_tf.push_back(style_w[2] / denom);
    record_.admin_position.push_back(ledger_.admin_position);
    record_.clearing_iterations.push_back(clearing.iterations);

    record_.total_cash.push_back(cash);
    record_.total_shares.push_back(shares);
    record_.aggregate_short.push_back(short_sum);
    record_.interest_paid.push_back(interest);
    record_.dividends_paid.push_back(dividends);
    record_.admin_proceeds.push_back(price_ * admin_sell);
    record_.flow_total.push_back(flow_sum);
    record_.written_off.push_back(written_off);
    record_.days_completed = static_cast<long>(record_.price.size());

    if (record_fund_panel_) {
        for (std::size_t i = 0; i < funds_.size(); ++i) {
            const Fund& f = funds_[i];
            if (!f.active) {
                continue;
            }
            record_.fund_panel.push_back({day_, f.id, f.style, wealth(f, price_),
                                          f.cash, f.shares, f.bounded_signal,
                                          i < fund_flows.size() ? fund_flows[i] : 0.0});
        }
    }
}

RunRecord Simulation::run() {
    while (day_ < config_.run.t_max_days) {
        try {
            step_day();
        } catch (const NoBracketError& e) {
            record_.failure = e.what();
            record_.failure_day = day_;
            break;
        } catch (const TotalCollapseError& e) {
            record_.failure = e.what();
            record_.failure_day = day_;
            break;
        }
    }
    return std::move(record_);
}

void Simulation::set_adaptive_signal(int fund_id, double bounded) {
    adaptive_signals_[fund_id] = bounded;
}

int Simulation::add_adaptive_fund(double wealth_share) {
    // share 0 is allowed: the fund then holds nothing and cannot trade,
    // which makes it a pure observer of an otherwise unchanged market.
    if (!(wealth_share >= 0.0) || wealth_share >= 1.0) {
        throw ConfigError("adaptive wealth share must lie in [0, 1)");
    }
    const double total = total_wealth();
    Fund f;
    f.id = split_ctx_.next_fund_id++;
    f.style = Style::Adaptive;
    f.leverage = config_.market.leverage;
    f.aggression = config_.market.aggression;
    f.cash = wealth_share * total;
    f.initial_wealth = f.cash;
    funds_.push_back(std::move(f));
    return funds_.back().id;
}

void Simulation::external_flow(int fund_id, double amount) {
    for (Fund& f : funds_) {
        if (f.id == fund_id && f.active) {
            f.cash += amount;
            return;
        }
    }
    throw std::invalid_argument("external_flow: no active fund with id " +
                                std::to_string(fund_id));
}

void Simulation::convert_to_adaptive(int fund_id) {
    // Settle the initial placement with the fund still in its base role, so
    // a converted fund inherits exactly the positions its base self would
    // have opened with. Converting before placement would re-clear the
    // placement round against a different demand curve and the whole run
    // would diverge from a plain run of the same seed.
    if (!placed_) {
        place_initial_positions();
        placed_ = true;
    }
    for (Fund& f : funds_) {
        if (f.id == fund_id) {
            f.style = Style::Adaptive;
            f.price_sensitive = false;
            f.fixed_bounded = 0.0;
            return;
        }
    }
    throw ConfigError("no fund with id " + std::to_string(fund_id));
}

double Simulation::total_wealth() const {
    double total = 0.0;
    for (const Fund& f : funds_) {
        if (f.active) {
            total += wealth(f, price_);
        }
    }
    return total;
}

double Simulation::style_wealth(Style style) const {
    double total = 0.0;
    for (const Fund& f : funds_) {
        if (f.active && f.style == style) {
            total += wealth(f, price_);
        }
    }
    return total;
}

std::vector<RunRecord> run_ensemble(const std::vector<SimConfig>& configs, int workers,
                                    bool record_fund_panel) {
    std::vector<RunRecord> out(configs.size());
    if (configs.empty()) {
        return out;
    }
    const auto run_one = [&](std::size_t i) {
        try {
            Simulation sim(configs[i], record_fund_panel);
            out[i] = sim.run();
        } catch (const std::exception& e) {
            out[i] = RunRecord{};
            out[i].failure = e.what();
        }
    };
    workers = std::max(1, workers);
    if (workers == 1 || configs.size() == 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            run_one(i);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < configs.size();
             i = next.fetch_add(1)) {
            run_one(i);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<std::size_t>(workers, configs.size());
    pool.reserve(n);
    for (int w = 0; w < n; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    return out;
}

}  // namespace evology
