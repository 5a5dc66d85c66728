#include "evology/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "evology/random.hpp"

namespace evology {

double net_flow(double inflows, double outflows, double tna) {
    if (!(tna > 0.0)) {
        throw std::domain_error("net_flow requires TNA > 0");
    }
    return (inflows - outflows) / tna;
}

double flow_adjusted_return(double tna_now, double tna_lagged, double flow) {
    if (!(tna_lagged > 0.0)) {
        throw std::domain_error("flow_adjusted_return requires lagged TNA > 0");
    }
    return (tna_now - tna_lagged) / tna_lagged - flow;
}

namespace {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-14;
    constexpr double floor = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < floor) {
        d = floor;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < floor) {
            d = floor;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < floor) {
            c = floor;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < floor) {
            d = floor;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < floor) {
            c = floor;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) {
            break;
        }
    }
    return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    const double front =
        std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace

double two_sided_t_pvalue(double t, double df) {
    if (!std::isfinite(t)) {
        return 0.0;
    }
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

OlsResult ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                  const std::vector<std::string>& names) {
    const long n = response.size();
    if (design.rows() != n) {
        throw std::invalid_argument("ols_fit: design/response row mismatch");
    }
    if (static_cast<long>(names.size()) != design.cols()) {
        throw std::invalid_argument("ols_fit: one name per design column required");
    }
    const long p = design.cols() + 1;
    if (n <= p) {
        throw std::invalid_argument("ols_fit: need more observations than parameters");
    }

    Eigen::MatrixXd x(n, p);
    x.col(0).setOnes();
    x.rightCols(design.cols()) = design;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        // The pivot order puts the independent columns first; whatever is
        // left over is in the span of the columns before it.
        const auto& perm = qr.colsPermutation().indices();
        std::string suspects;
        for (long j = qr.rank(); j < p; ++j) {
            const long col = perm(j);
            if (!suspects.empty()) {
                suspects += ", ";
            }
            suspects += col == 0 ? "intercept" : names[static_cast<std::size_t>(col - 1)];
        }
        throw std::invalid_argument("ols_fit: design is rank deficient; dependent columns: " +
                                    suspects);
    }

    OlsResult out;
    out.n_obs = n;
    out.names.reserve(static_cast<std::size_t>(p));
    out.names.push_back("intercept");
    out.names.insert(out.names.end(), names.begin(), names.end());

    const Eigen::VectorXd beta = qr.solve(response);
    const Eigen::VectorXd residuals = response - x * beta;
    const double ssr = residuals.squaredNorm();
    const double df = static_cast<double>(n - p);
    const double sigma2 = ssr / df;
    const Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

    out.coefficients.assign(beta.data(), beta.data() + p);
    for (long j = 0; j < p; ++j) {
        const double se = std::sqrt(sigma2 * xtx_inv(j, j));
        out.std_errors.push_back(se);
        const double t = se > 0.0 ? beta(j) / se
                                  : std::numeric_limits<double>::infinity();
        out.t_stats.push_back(t);
        out.p_values.push_back(two_sided_t_pvalue(t, df));
    }

    const double sst = (response.array() - response.mean()).square().sum();
    if (sst > 0.0) {
        out.r_squared = 1.0 - ssr / sst;
    } else {
        out.r_squared = ssr <= 1e-300 ? 1.0 : 0.0;
    }

    const double m2 = residuals.squaredNorm() / static_cast<double>(n);
    if (m2 > 0.0) {
        const double m3 = residuals.array().cube().mean();
        const double m4 = residuals.array().square().square().mean();
        out.residual_skewness = m3 / std::pow(m2, 1.5);
        out.residual_excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return out;
}

namespace {

struct fund_series {
    std::map<long, const panel_row*> by_period;
};

}  // namespace

FlowRegressionData build_flow_regression(const FundPanel& panel,
                                         const std::vector<long>& lags,
                                         const ScreenConfig& screen,
                                         bool include_controls) {
    if (lags.empty()) {
        throw std::invalid_argument("build_flow_regression: no lags given");
    }
    for (long k : lags) {
        if (k <= 0) {
            throw std::invalid_argument("build_flow_regression: lags must be positive");
        }
    }

    FlowRegressionData out;
    out.rows_in_panel = static_cast<long>(panel.rows.size());

    std::map<std::string, fund_series> funds;
    std::set<std::string> styles;
    for (const panel_row& row : panel.rows) {
        if (!(row.tna > 0.0)) {
            continue;  // unusable even as a benchmark constituent
        }
        funds[row.fund_id].by_period[row.period] = &row;
        styles.insert(row.style);
    }

    // TNA-weighted cross-sectional mean of the lag-k flow-adjusted return,
    // per (period, lag), over every fund with that window — the benchmark is
    // the whole market, not the screened subset.
    auto lagged_return = [](const fund_series& series, const panel_row& row,
                            long lag, double* value) {
        const auto it = series.by_period.find(row.period - lag);
        if (it == series.by_period.end()) {
            return false;
        }
        const double flow = net_flow(row.inflows, row.outflows, row.tna);
        *value = flow_adjusted_return(row.tna, it->second->tna, flow);
        return true;
    };

    std::map<std::pair<long, long>, std::pair<double, double>> benchmark_sums;
    for (const auto& [fund_id, series] : funds) {
        for (const auto& [period, row] : series.by_period) {
            for (long k : lags) {
                double r = 0.0;
                if (lagged_return(series, *row, k, &r)) {
                    auto& [weighted, weight] = benchmark_sums[{period, k}];
                    weighted += row->tna * r;
                    weight += row->tna;
                }
            }
        }
    }

    std::vector<std::string> style_columns(styles.begin(), styles.end());
    if (!style_columns.empty()) {
        style_columns.erase(style_columns.begin());  // baseline category
    }

    out.names.reserve(lags.size());
    for (long k : lags) {
        out.names.push_back("lag_" + std::to_string(k));
    }
    if (include_controls) {
        out.names.push_back("age_months");
        out.names.push_back("expense_ratio");
        out.names.push_back("log_tna");
        for (const std::string& s : style_columns) {
            out.names.push_back("style_" + s);
        }
    }

    std::vector<std::vector<double>> design_rows;
    std::vector<double> responses;
    for (const auto& [fund_id, series] : funds) {
        for (const auto& [period, row] : series.by_period) {
            if (row->tna < screen.min_tna || row->age_months < screen.min_age_months) {
                out.rows_dropped_screen += 1;
                continue;
            }
            std::vector<double> cells;
            cells.reserve(out.names.size());
            bool complete = true;
            for (long k : lags) {
                double r = 0.0;
                if (!lagged_return(series, *row, k, &r)) {
                    complete = false;
                    break;
                }
                const auto& [weighted, weight] = benchmark_sums.at({period, k});
                cells.push_back(r - weighted / weight);
            }
            if (!complete) {
                out.rows_dropped_window += 1;
                continue;
            }
            if (include_controls) {
                cells.push_back(row->age_months);
                cells.push_back(row->expense_ratio);
                cells.push_back(std::log(row->tna));
                for (const std::string& s : style_columns) {
                    cells.push_back(row->style == s ? 1.0 : 0.0);
                }
            }
            design_rows.push_back(std::move(cells));
            responses.push_back(net_flow(row->inflows, row->outflows, row->tna));
        }
    }
    // Whatever is neither kept nor already accounted for was rejected before
    // indexing (non-positive TNA, shadowed duplicates); book it as screened.
    out.rows_dropped_screen += out.rows_in_panel -
                               static_cast<long>(design_rows.size()) -
                               out.rows_dropped_screen - out.rows_dropped_window;

    if (design_rows.empty()) {
        throw std::runtime_error(
            "build_flow_regression: no rows survive the screen and lag windows");
    }

    out.design.resize(static_cast<long>(design_rows.size()),
                      static_cast<long>(out.names.size()));
    out.response.resize(static_cast<long>(responses.size()));
    for (std::size_t i = 0; i < design_rows.size(); ++i) {
        for (std::size_t j = 0; j < design_rows[i].size(); ++j) {
            out.design(static_cast<long>(i), static_cast<long>(j)) = design_rows[i][j];
        }
        out.response(static_cast<long>(i)) = responses[i];
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

double parse_double(const std::string& cell, const std::string& column, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) {
            throw std::invalid_argument(cell);
        }
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("panel csv line " + std::to_string(line_no) +
                                 ": bad number in column " + column + ": '" + cell + "'");
    }
}

}  // namespace

FundPanel read_panel_csv(std::istream& in) {
    static const std::vector<std::string> required{
        "fund_id", "period", "tna", "inflows",
        "outflows", "age_months", "style", "expense_ratio"};

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("panel csv: empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const std::vector<std::string> header = split_csv_line(line);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        index[header[i]] = i;
    }
    std::string missing;
    for (const std::string& name : required) {
        if (index.find(name) == index.end()) {
            if (!missing.empty()) {
                missing += ", ";
            }
            missing += name;
        }
    }
    if (!missing.empty()) {
        throw std::runtime_error("panel csv: missing columns: " + missing);
    }

    FundPanel panel;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            throw std::runtime_error("panel csv line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(header.size()) +
                                     " cells, got " + std::to_string(cells.size()));
        }
        panel_row row;
        row.fund_id = cells[index.at("fund_id")];
        row.period = static_cast<long>(parse_double(cells[index.at("period")], "period", line_no));
        row.tna = parse_double(cells[index.at("tna")], "tna", line_no);
        row.inflows = parse_double(cells[index.at("inflows")], "inflows", line_no);
        row.outflows = parse_double(cells[index.at("outflows")], "outflows", line_no);
        row.age_months = parse_double(cells[index.at("age_months")], "age_months", line_no);
        row.style = cells[index.at("style")];
        row.expense_ratio =
            parse_double(cells[index.at("expense_ratio")], "expense_ratio", line_no);
        panel.rows.push_back(std::move(row));
    }
    return panel;
}

FundPanel read_panel_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("panel csv: cannot open " + path);
    }
    return read_panel_csv(in);
}

FundPanel synthetic_panel(const SyntheticPanelSpec& spec) {
    if (spec.lags.size() != spec.lag_coefficients.size()) {
        throw std::invalid_argument("synthetic_panel: one coefficient per lag");
    }
    if (spec.n_funds < 1 || spec.n_periods < 2) {
        throw std::invalid_argument("synthetic_panel: need funds and periods");
    }

    Rng rng(spec.seed, "panel");
    const int n = spec.n_funds;
    const long t_max = spec.n_periods;

    // TNA paths move first; flows are then solved so that each fund's net
    // flow equals the planted linear model of its excess lagged returns.
    std::vector<std::vector<double>> tna(static_cast<std::size_t>(n));
    std::vector<std::string> styles{"value", "growth", "blend"};
    std::vector<double> base(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        base[static_cast<std::size_t>(i)] = 5e7 * (1.0 + 0.2 * rng.uniform());
        double level = base[static_cast<std::size_t>(i)];
        auto& path = tna[static_cast<std::size_t>(i)];
        path.reserve(static_cast<std::size_t>(t_max));
        for (long t = 0; t < t_max; ++t) {
            level *= 1.0 + spec.return_volatility * rng.normal();
            if (level < 1.0) {
                level = 1.0;
            }
            path.push_back(level);
        }
    }

    const long first = *std::max_element(spec.lags.begin(), spec.lags.end());
    const double coef_sum =
        std::accumulate(spec.lag_coefficients.begin(), spec.lag_coefficients.end(), 0.0);

    FundPanel panel;
    for (long t = 0; t < t_max; ++t) {
        std::vector<double> flows(static_cast<std::size_t>(n), 0.0);
        if (t >= first) {
            // Gross TNA growth per lag, and its TNA-weighted mean.
            std::vector<std::vector<double>> growth(
                spec.lags.size(), std::vector<double>(static_cast<std::size_t>(n)));
            std::vector<double> mean_growth(spec.lags.size(), 0.0);
            double weight_sum = 0.0;
            for (int i = 0; i < n; ++i) {
                weight_sum += tna[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
            }
            for (std::size_t k = 0; k < spec.lags.size(); ++k) {
                for (int i = 0; i < n; ++i) {
                    const auto& path = tna[static_cast<std::size_t>(i)];
                    const double g =
                        path[static_cast<std::size_t>(t)] /
                            path[static_cast<std::size_t>(t - spec.lags[k])] -
                        1.0;
                    growth[k][static_cast<std::size_t>(i)] = g;
                    mean_growth[k] += path[static_cast<std::size_t>(t)] * g / weight_sum;
                }
            }
            // With f̄ denoting the TNA-weighted mean flow, the planted model
            //   f_i = c0 + Σ_k c_k [(g_ki − f_i) − (ḡ_k − f̄)]
            // averages to f̄ = c0, so each flow solves in closed form.
            for (int i = 0; i < n; ++i) {
                double b = 0.0;
                for (std::size_t k = 0; k < spec.lags.size(); ++k) {
                    b += spec.lag_coefficients[k] *
                         (growth[k][static_cast<std::size_t>(i)] - mean_growth[k]);
                }
                double f = spec.intercept + b / (1.0 + coef_sum);
                if (spec.noise_sd > 0.0) {
                    f += spec.noise_sd * rng.normal();
                }
                flows[static_cast<std::size_t>(i)] = f;
            }
        }
        for (int i = 0; i < n; ++i) {
            const auto& path = tna[static_cast<std::size_t>(i)];
            panel_row row;
            row.fund_id = "f" + std::to_string(i);
            row.period = t;
            row.tna = path[static_cast<std::size_t>(t)];
            const double amount = flows[static_cast<std::size_t>(i)] * row.tna;
            row.inflows = amount > 0.0 ? amount : 0.0;
            row.outflows = amount > 0.0 ? 0.0 : -amount;
            row.age_months = 48.0 + static_cast<double>(t);
            row.style = styles[static_cast<std::size_t>(i) % styles.size()];
            row.expense_ratio = 0.005 + 0.0001 * (i % 7);
            panel.rows.push_back(std::move(row));
        }
    }
    return panel;
}

std::string format_ols_table(const OlsResult& result) {
    std::ostringstream out;
    out << "OLS regression (" << result.n_obs << " obs, R² = ";
    out.precision(4);
    out << std::fixed << result.r_squared << ")\n";
    out << "covariance type: nonrobust\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %12s %12s %9s %9s\n", "", "coef",
                  "std err", "t", "P>|t|");
    out << line;
    for (std::size_t j = 0; j < result.names.size(); ++j) {
        std::snprintf(line, sizeof line, "%-16s %12.6f %12.6f %9.3f %9.3f\n",
                      result.names[j].c_str(), result.coefficients[j],
                      result.std_errors[j], result.t_stats[j], result.p_values[j]);
        out << line;
    }
    std::snprintf(line, sizeof line, "residual skew %.4f  excess kurtosis %.4f\n",
                  result.residual_skewness, result.residual_excess_kurtosis);
    out << line;
    return out.str();
}

nlohmann::json to_json(const OlsResult& result) {
    nlohmann::json doc;
    doc["n_obs"] = result.n_obs;
    doc["r_squared"] = result.r_squared;
    doc["residual_skewness"] = result.residual_skewness;
    doc["residual_excess_kurtosis"] = result.residual_excess_kurtosis;
    nlohmann::json coeffs = nlohmann::json::array();
    for (std::size_t j = 0; j < result.names.size(); ++j) {
        coeffs.push_back({{"name", result.names[j]},
                          {"coefficient", result.coefficients[j]},
                          {"std_error", result.std_errors[j]},
                          {"t", result.t_stats[j]},
                          {"p", result.p_values[j]}});
    }
    doc["coefficients"] = std::move(coeffs);
    return doc;
}

}  // namespace evology
