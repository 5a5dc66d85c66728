#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evology/accounting.hpp"
#include "evology/config.hpp"
#include "evology/market.hpp"

namespace evology {

/// Everything a completed run exposes, column-wise with one entry per day.
/// The bookkeeping columns beyond the published series exist so conservation
/// identities can be asserted without re-running anything.
struct RunRecord {
    std::vector<double> price;
    std::vector<double> fundamental;  ///< wealth-weighted mean valuation
    std::vector<double> dividend;
    std::vector<double> volume;
    std::vector<double> ws_nt;
    std::vector<double> ws_vi;
    std::vector<double> ws_tf;
    std::vector<double> admin_position;  ///< end of day
    std::vector<int> clearing_iterations;

    std::vector<double> total_cash;       ///< end of day, all active funds
    std::vector<double> total_shares;     ///< end of day, fund-held
    std::vector<double> aggregate_short;  ///< sum of short positions' magnitude
    std::vector<double> interest_paid;    ///< credited to funds this day
    std::vector<double> dividends_paid;   ///< credited to funds this day
    std::vector<double> admin_proceeds;   ///< cash funds paid the administrator
    std::vector<double> flow_total;       ///< investor flows booked this day
    std::vector<double> written_off;      ///< insolvent funds' residual cash

    struct FundDay {
        long day;
        int fund_id;
        Style style;
        double wealth;
        double cash;
        double shares;
        double signal;  ///< bounded allocation realised at the day's price
        double flow;
    };
    std::vector<FundDay> fund_panel;  ///< filled only when requested

    long days_completed = 0;
    std::optional<std::string> failure;  ///< set when the run ended early
    long failure_day = -1;

    double final_price() const { return price.empty() ? 0.0 : price.back(); }
};

/// One market instance stepping through the daily loop: processes advance,
/// funds form signals, the market clears, orders execute, dividends and
/// interest accrue, investor flows arrive on their cadence, insolvent funds
/// hand positions to the administrator and the wealthiest funds split to
/// refill the population.
class Simulation {
  public:
    explicit Simulation(const SimConfig& config, bool record_fund_panel = false);

    /// Advances one day. Throws NoBracketError or TotalCollapseError, with
    /// the failing day in the message.
    void step_day();

    /// Runs the configured horizon. Early termination is captured in the
    /// returned record, not thrown.
    RunRecord run();

    /// Commits tomorrow's bounded allocation in [-1, 1] for an adaptive
    /// fund; it keeps trading this value until changed.
    void set_adaptive_signal(int fund_id, double bounded);

    /// Adds an adaptive fund carrying `wealth_share` of current total wealth
    /// (as fresh outside capital; existing funds are not diluted). Returns
    /// its fund id.
    int add_adaptive_fund(double wealth_share);

    /// Converts an existing fund into an adaptive one in place: same cash,
    /// shares and history, signals now supplied externally. Settles the
    /// initial placement first (with the fund in its base role) and leaves
    /// random streams untouched, so the rest of the run replays
    /// bit-identically against a plain run of the same seed.
    void convert_to_adaptive(int fund_id);

    /// Books an immediate outside cash movement into (positive) or out of
    /// (negative) an active fund; the money trades from the next day on.
    void external_flow(int fund_id, double amount);

    /// Per-fund investor flows booked during the last step_day, keyed by the
    /// fund ids that held them at booking time (before any same-day splits).
    const std::vector<std::pair<int, double>>& last_flows() const {
        return last_flows_;
    }

    /// Splits executed during the last step_day, in order.
    const std::vector<SplitEvent>& last_splits() const { return last_splits_; }

    long day() const { return day_; }
    double price() const { return price_; }
    double current_dividend() const { return dividend_.dividend; }
    const std::vector<Fund>& funds() const { return funds_; }
    const std::vector<double>& price_history() const { return price_history_; }
    const RunRecord& record() const { return record_; }
    RunRecord take_record() { return std::move(record_); }
    /// Moves out the fund-panel rows accumulated so far and clears them, so
    /// a caller writing the panel day by day keeps memory flat even on
    /// multi-decade runs with hundreds of funds.
    std::vector<RunRecord::FundDay> drain_fund_panel() {
        std::vector<RunRecord::FundDay> rows = std::move(record_.fund_panel);
        record_.fund_panel.clear();
        return rows;
    }
    const SimConfig& config() const { return config_; }
    double admin_position() const { return ledger_.admin_position; }

    /// Total wealth of active funds at the current price.
    double total_wealth() const;
    /// Aggregate wealth of one style's active funds at the current price.
    double style_wealth(Style style) const;

  private:
    void initialize();
    void place_initial_positions();
    void compute_signals();
    double fundamental_value() const;
    void append_records(const ClearingResult& clearing, double admin_sell,
                        const ExecutionSummary& exec, double interest, double dividends,
                        double flow_sum, double written_off,
                        const std::vector<double>& fund_flows);

    SimConfig config_;
    bool record_fund_panel_ = false;

    std::vector<Fund> funds_;
    DividendProcess dividend_;
    Rng dividend_rng_;
    InsolvencyLedger ledger_;
    SplitContext split_ctx_;
    std::unordered_map<int, double> adaptive_signals_;

    std::vector<double> price_history_;  ///< [0] = initial price, then one per day
    double price_ = 0.0;
    long day_ = 0;
    bool placed_ = false;  ///< initial placement round done
    RunRecord record_;
    std::vector<std::pair<int, double>> last_flows_;
    std::vector<SplitEvent> last_splits_;
};

/// Runs every config independently across `workers` threads. Results arrive
/// in input order and are bit-identical for any worker count; failures land
/// in the corresponding record instead of aborting the batch.
std::vector<RunRecord> run_ensemble(const std::vector<SimConfig>& configs, int workers,
                                    bool record_fund_panel = false);

}  // namespace evology
