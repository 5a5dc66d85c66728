#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace evology {

// One fund-period observation.  `period` is a contiguous integer index
// (months in the reference data set); lags are expressed in the same unit.
struct panel_row {
    std::string fund_id;
    long period = 0;
    double tna = 0.0;
    double inflows = 0.0;
    double outflows = 0.0;
    double age_months = 0.0;
    std::string style;
    double expense_ratio = 0.0;
};

struct FundPanel {
    std::vector<panel_row> rows;
};

// f(t) = (I - O) / TNA(t).
double net_flow(double inflows, double outflows, double tna);

// r_k(t) = (TNA(t) - TNA(t-k)) / TNA(t-k) - f(t): the portfolio return once
// the flow that also moved TNA is stripped out.
double flow_adjusted_return(double tna_now, double tna_lagged, double flow);

struct OlsResult {
    std::vector<std::string> names;  // "intercept" first
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> t_stats;
    std::vector<double> p_values;
    double r_squared = 0.0;
    long n_obs = 0;
    double residual_skewness = 0.0;
    double residual_excess_kurtosis = 0.0;
};

// Least squares of response on [1, design] with classical (nonrobust)
// standard errors and two-sided t-test p values.  `names` labels the design
// columns (excluding the intercept) for diagnostics and printing.
OlsResult ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                  const std::vector<std::string>& names);

// P(|T| >= |t|) for Student's t with df degrees of freedom.
double two_sided_t_pvalue(double t, double df);

struct ScreenConfig {
    double min_tna = 15e6;
    double min_age_months = 36.0;
};

struct FlowRegressionData {
    Eigen::MatrixXd design;    // one column per lag (plus controls if requested)
    Eigen::VectorXd response;  // net flows
    std::vector<std::string> names;
    long rows_in_panel = 0;
    long rows_dropped_screen = 0;
    long rows_dropped_window = 0;
};

// Builds the flow-performance regression: response is the net flow of each
// surviving fund-period row; regressor k is the fund's flow-adjusted return
// over the trailing `lag` periods minus the TNA-weighted cross-sectional
// mean of the same quantity.  Rows missing any lag window are dropped, as
// are rows failing the size/age screen.
FlowRegressionData build_flow_regression(const FundPanel& panel,
                                         const std::vector<long>& lags,
                                         const ScreenConfig& screen = {},
                                         bool include_controls = false);

FundPanel read_panel_csv(std::istream& in);
FundPanel read_panel_csv_file(const std::string& path);

struct SyntheticPanelSpec {
    int n_funds = 40;
    long n_periods = 240;
    std::vector<long> lags{1, 12};
    double intercept = -0.02;
    std::vector<double> lag_coefficients{0.01, 0.005};
    double return_volatility = 0.02;
    double noise_sd = 0.0;  // added to each net flow
    std::uint64_t seed = 1;
};

// Generates a balanced panel whose net flows satisfy the planted linear
// model exactly (up to `noise_sd`), so regression round trips are testable.
FundPanel synthetic_panel(const SyntheticPanelSpec& spec);

std::string format_ols_table(const OlsResult& result);
nlohmann::json to_json(const OlsResult& result);

}  // namespace evology
