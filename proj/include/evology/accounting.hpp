#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "evology/fund.hpp"

namespace evology {

/// Fund wealth: cash plus marked-to-market shares minus liabilities.
double wealth(const Fund& fund, double price);

/// End-of-day capital gains on post-trade positions: interest on cash
/// (negative cash pays the same rate as a borrowing cost) and dividends on
/// shares (short positions pay the dividend out).
void accrue(Fund& fund, double dividend, double daily_interest);

/// Per-entry excess over the weight-averaged mean: r_i - sum(w r)/sum(w).
std::vector<double> excess_returns(std::span<const double> returns,
                                   std::span<const double> weights);

/// Flow-performance rule mapping a fund's 10-year excess return (in
/// percentage points) to an annualised net flow fraction of its wealth.
struct FlowModel {
    double intercept_annual = -0.024610;  ///< flow fraction per year at zero excess
    double coef_10y = 0.000053;  ///< flow fraction per percentage point of 10y excess
    int period_days = 21;        ///< application cadence, trading days
};

/// Annualised flow fraction for a 10-year excess return in percentage points.
inline double annual_flow_fraction(const FlowModel& model, double excess_pct) {
    return model.intercept_annual + model.coef_10y * excess_pct;
}

/// Applies one period of external investor flows as cash adjustments.
/// Funds with a full 10-year wealth history use the 10-year excess return;
/// younger funds fall back to their annualised since-inception excess return.
/// Returns the per-fund cash flow actually booked (0 for skipped funds).
std::vector<double> apply_flows(std::span<Fund> funds, const FlowModel& model,
                                double price);

/// Administrator inventory absorbed from insolvent funds plus the count of
/// population slots waiting to be refilled by splits. Inventory is signed:
/// at leverage 1 an insolvency is a blown-up short, so the administrator
/// typically inherits a short position and covers it gradually.
struct InsolvencyLedger {
    double admin_position = 0.0;
    double liquidation_rate = 0.05;  ///< fraction of inventory unwound per day
    int vacancy_count = 0;
};

struct SolvencySummary {
    int funds_removed = 0;
    double shares_absorbed = 0.0;
    double cash_written_off = 0.0;  ///< residual cash removed with the fund
};

/// Deactivates funds with strictly negative wealth, moving their shares to
/// the administrator and writing off residual cash and loans.
SolvencySummary check_solvency(std::span<Fund> funds, double price,
                               InsolvencyLedger& ledger);

/// Today's administrator order for the clearing auction: a fixed fraction of
/// the inventory, with near-empty positions flushed in full so they reach
/// exactly zero. The ledger itself is updated after execution.
double administer_liquidation(const InsolvencyLedger& ledger, double rate);

struct TotalCollapseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One fund split: the parent id disappears, two child ids take over with
/// half the parent's positions each. Outside unit-holders can follow their
/// stake through these records.
struct SplitEvent {
    int parent_id = -1;
    int child_a = -1;
    int child_b = -1;
};

struct SplitContext {
    std::uint64_t master_seed = 0;
    int next_fund_id = 0;
    long split_counter = 0;
    std::vector<SplitEvent> events;  ///< appended in execution order
};

/// Fills every vacant population slot by splitting the currently wealthiest
/// active fund into two equal halves (same style and parameters, half the
/// cash/shares/loans each). Noise-trader children keep the parent's current
/// sentiment level but draw from fresh random streams. Throws
/// TotalCollapseError when no fund with positive wealth remains.
int split_wealthiest(std::vector<Fund>& funds, InsolvencyLedger& ledger, double price,
                     SplitContext& ctx);

}  // namespace evology
