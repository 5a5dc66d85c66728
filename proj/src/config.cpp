#include "evology/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string_view>

namespace evology {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

std::string join(const std::string& prefix, std::string_view key) {
    if (prefix.empty()) {
        return std::string(key);
    }
    return prefix + "." + std::string(key);
}

void expect_object(const json& node, const std::string& path) {
    if (!node.is_object()) {
        fail(path, "expected an object");
    }
}

void reject_unknown(const json& node, const std::string& path,
                    std::initializer_list<std::string_view> known) {
    for (const auto& item : node.items()) {
        bool ok = false;
        for (auto k : known) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            fail(join(path, item.key()), "unknown key");
        }
    }
}

void read_number(const json& node, const std::string& path, std::string_view key,
                 double& out) {
    if (!node.contains(key)) {
        return;
    }
    const json& v = node.at(std::string(key));
    if (!v.is_number()) {
        fail(join(path, key), "expected a number");
    }
    out = v.get<double>();
}

void read_int(const json& node, const std::string& path, std::string_view key,
              long& out) {
    if (!node.contains(key)) {
        return;
    }
    const json& v = node.at(std::string(key));
    if (!v.is_number_integer()) {
        fail(join(path, key), "expected an integer");
    }
    out = v.get<long>();
}

void read_int(const json& node, const std::string& path, std::string_view key,
              int& out) {
    long wide = out;
    read_int(node, path, key, wide);
    out = static_cast<int>(wide);
}

void read_u64(const json& node, const std::string& path, std::string_view key,
              std::uint64_t& out) {
    if (!node.contains(key)) {
        return;
    }
    const json& v = node.at(std::string(key));
    if (v.is_number_unsigned()) {
        out = v.get<std::uint64_t>();
    } else if (v.is_number_integer() && v.get<long long>() >= 0) {
        out = static_cast<std::uint64_t>(v.get<long long>());
    } else {
        fail(join(path, key), "expected a non-negative integer");
    }
}

void read_bool(const json& node, const std::string& path, std::string_view key,
               bool& out) {
    if (!node.contains(key)) {
        return;
    }
    const json& v = node.at(std::string(key));
    if (!v.is_boolean()) {
        fail(join(path, key), "expected a boolean");
    }
    out = v.get<bool>();
}

template <typename T, std::size_t N>
void read_array(const json& node, const std::string& path, std::string_view key,
                std::array<T, N>& out) {
    if (!node.contains(key)) {
        return;
    }
    const json& v = node.at(std::string(key));
    if (!v.is_array() || v.size() != N) {
        fail(join(path, key), "expected an array of " + std::to_string(N) + " numbers");
    }
    for (std::size_t i = 0; i < N; ++i) {
        if constexpr (std::is_integral_v<T>) {
            if (!v[i].is_number_integer()) {
                fail(join(path, key) + "[" + std::to_string(i) + "]",
                     "expected an integer");
            }
        } else {
            if (!v[i].is_number()) {
                fail(join(path, key) + "[" + std::to_string(i) + "]",
                     "expected a number");
            }
        }
        out[i] = v[i].get<T>();
    }
}

void parse_population(const json& node, SimConfig::Population& out) {
    const std::string path = "population";
    expect_object(node, path);
    reject_unknown(node, path,
                   {"n_nt", "n_vi", "n_tf", "initial_shares", "initial_wealth_multiple",
                    "discount_rate_range", "horizon_range"});
    read_int(node, path, "n_nt", out.n_nt);
    read_int(node, path, "n_vi", out.n_vi);
    read_int(node, path, "n_tf", out.n_tf);
    read_array(node, path, "initial_shares", out.initial_shares);
    read_number(node, path, "initial_wealth_multiple", out.initial_wealth_multiple);
    read_array(node, path, "discount_rate_range", out.discount_rate_range);
    read_array(node, path, "horizon_range", out.horizon_range);
}

void parse_processes(const json& node, SimConfig& out) {
    const std::string path = "processes";
    expect_object(node, path);
    reject_unknown(node, path, {"dividend", "ou"});
    if (node.contains("dividend")) {
        const json& d = node.at("dividend");
        const std::string dpath = "processes.dividend";
        expect_object(d, dpath);
        reject_unknown(d, dpath, {"delta0", "growth_annual", "sigma_daily", "rho"});
        read_number(d, dpath, "delta0", out.dividend.delta0);
        read_number(d, dpath, "growth_annual", out.dividend.growth_annual);
        read_number(d, dpath, "sigma_daily", out.dividend.sigma_daily);
        read_number(d, dpath, "rho", out.dividend.rho);
    }
    if (node.contains("ou")) {
        const json& o = node.at("ou");
        const std::string opath = "processes.ou";
        expect_object(o, opath);
        reject_unknown(o, opath, {"theta", "sigma", "mu"});
        read_number(o, opath, "theta", out.ou.theta);
        read_number(o, opath, "sigma", out.ou.sigma);
        read_number(o, opath, "mu", out.ou.mu);
    }
}

void parse_market(const json& node, SimConfig::Market& out) {
    const std::string path = "market";
    expect_object(node, path);
    reject_unknown(node, path,
                   {"supply_q", "interest_annual", "leverage", "aggression",
                    "clearing_tol"});
    read_number(node, path, "supply_q", out.supply_q);
    read_number(node, path, "interest_annual", out.interest_annual);
    read_number(node, path, "leverage", out.leverage);
    read_number(node, path, "aggression", out.aggression);
    read_number(node, path, "clearing_tol", out.clearing_tol);
}

void parse_flows(const json& node, SimConfig::Flows& out) {
    const std::string path = "flows";
    expect_object(node, path);
    reject_unknown(node, path,
                   {"enabled", "intercept_annual", "coef_10y", "period_days"});
    read_bool(node, path, "enabled", out.enabled);
    read_number(node, path, "intercept_annual", out.intercept_annual);
    read_number(node, path, "coef_10y", out.coef_10y);
    read_int(node, path, "period_days", out.period_days);
}

void parse_solvency(const json& node, SimConfig::Solvency& out) {
    const std::string path = "solvency";
    expect_object(node, path);
    reject_unknown(node, path, {"liquidation_rate", "split_factor"});
    read_number(node, path, "liquidation_rate", out.liquidation_rate);
    read_int(node, path, "split_factor", out.split_factor);
}

void parse_run(const json& node, SimConfig::Run& out) {
    const std::string path = "run";
    expect_object(node, path);
    reject_unknown(node, path, {"t_max_days", "master_seed"});
    read_int(node, path, "t_max_days", out.t_max_days);
    read_u64(node, path, "master_seed", out.master_seed);
}

}  // namespace

double SimConfig::daily_dividend_growth() const {
    return std::log(1.0 + dividend.growth_annual) / kTradingDaysPerYear;
}

double SimConfig::dividend_log_drift() const {
    return daily_dividend_growth() - 0.5 * dividend.sigma_daily * dividend.sigma_daily;
}

double SimConfig::daily_interest() const {
    return market.interest_annual / kTradingDaysPerYear;
}

SimConfig parse_config(const nlohmann::json& doc) {
    SimConfig config;
    expect_object(doc, "(root)");
    reject_unknown(doc, "",
                   {"population", "processes", "market", "flows", "solvency", "run"});
    if (doc.contains("population")) {
        parse_population(doc.at("population"), config.population);
    }
    if (doc.contains("processes")) {
        parse_processes(doc.at("processes"), config);
    }
    if (doc.contains("market")) {
        parse_market(doc.at("market"), config.market);
    }
    if (doc.contains("flows")) {
        parse_flows(doc.at("flows"), config.flows);
    }
    if (doc.contains("solvency")) {
        parse_solvency(doc.at("solvency"), config.solvency);
    }
    if (doc.contains("run")) {
        parse_run(doc.at("run"), config.run);
    }
    validate(config);
    return config;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return parse_config(doc);
}

nlohmann::json to_json(const SimConfig& c) {
    json doc;
    doc["population"] = {
        {"n_nt", c.population.n_nt},
        {"n_vi", c.population.n_vi},
        {"n_tf", c.population.n_tf},
        {"initial_shares", c.population.initial_shares},
        {"initial_wealth_multiple", c.population.initial_wealth_multiple},
        {"discount_rate_range", c.population.discount_rate_range},
        {"horizon_range", c.population.horizon_range},
    };
    doc["processes"] = {
        {"dividend",
         {{"delta0", c.dividend.delta0},
          {"growth_annual", c.dividend.growth_annual},
          {"sigma_daily", c.dividend.sigma_daily},
          {"rho", c.dividend.rho}}},
        {"ou", {{"theta", c.ou.theta}, {"sigma", c.ou.sigma}, {"mu", c.ou.mu}}},
    };
    doc["market"] = {
        {"supply_q", c.market.supply_q},
        {"interest_annual", c.market.interest_annual},
        {"leverage", c.market.leverage},
        {"aggression", c.market.aggression},
        {"clearing_tol", c.market.clearing_tol},
    };
    doc["flows"] = {
        {"enabled", c.flows.enabled},
        {"intercept_annual", c.flows.intercept_annual},
        {"coef_10y", c.flows.coef_10y},
        {"period_days", c.flows.period_days},
    };
    doc["solvency"] = {
        {"liquidation_rate", c.solvency.liquidation_rate},
        {"split_factor", c.solvency.split_factor},
    };
    doc["run"] = {
        {"t_max_days", c.run.t_max_days},
        {"master_seed", c.run.master_seed},
    };
    return doc;
}

void validate(const SimConfig& c) {
    const auto& p = c.population;
    if (p.n_nt < 0 || p.n_vi < 0 || p.n_tf < 0) {
        fail("population", "fund counts must be non-negative");
    }
    if (p.n_nt + p.n_vi + p.n_tf == 0) {
        fail("population", "at least one fund is required");
    }
    double share_sum = 0.0;
    for (double s : p.initial_shares) {
        if (s < 0.0) {
            fail("population.initial_shares", "entries must be non-negative");
        }
        share_sum += s;
    }
    if (std::abs(share_sum - 1.0) > 1e-12) {
        fail("population.initial_shares", "entries must sum to 1");
    }
    // Styles holding wealth need at least one fund to hold it.
    if (p.initial_shares[0] > 0.0 && p.n_nt == 0) {
        fail("population", "initial_shares gives wealth to NT but n_nt is 0");
    }
    if (p.initial_shares[1] > 0.0 && p.n_vi == 0) {
        fail("population", "initial_shares gives wealth to VI but n_vi is 0");
    }
    if (p.initial_shares[2] > 0.0 && p.n_tf == 0) {
        fail("population", "initial_shares gives wealth to TF but n_tf is 0");
    }
    if (!(p.initial_wealth_multiple >= 1.0)) {
        fail("population.initial_wealth_multiple", "must be at least 1");
    }
    if (!(p.discount_rate_range[0] > 0.0) ||
        p.discount_rate_range[0] > p.discount_rate_range[1]) {
        fail("population.discount_rate_range", "must satisfy 0 < lo <= hi");
    }
    if (p.horizon_range[0] < 2 || p.horizon_range[0] > p.horizon_range[1]) {
        fail("population.horizon_range", "must satisfy 2 <= lo <= hi");
    }

    if (!(c.dividend.delta0 > 0.0)) {
        fail("processes.dividend.delta0", "must be positive");
    }
    if (!(c.dividend.growth_annual > -1.0)) {
        fail("processes.dividend.growth_annual", "must exceed -1");
    }
    if (c.dividend.sigma_daily < 0.0) {
        fail("processes.dividend.sigma_daily", "must be non-negative");
    }
    if (c.dividend.rho < 0.0 || c.dividend.rho >= 1.0) {
        fail("processes.dividend.rho", "must lie in [0, 1)");
    }
    if (!(c.ou.theta > 0.0)) {
        fail("processes.ou.theta", "must be positive");
    }
    if (c.ou.sigma < 0.0) {
        fail("processes.ou.sigma", "must be non-negative");
    }
    if (!(c.ou.mu > 0.0)) {
        fail("processes.ou.mu", "must be positive");
    }

    if (!(c.market.supply_q > 0.0)) {
        fail("market.supply_q", "must be positive");
    }
    if (!(c.market.leverage >= 1.0)) {
        fail("market.leverage", "must be at least 1");
    }
    if (!(c.market.aggression > 0.0)) {
        fail("market.aggression", "must be positive");
    }
    if (!(c.market.clearing_tol > 0.0)) {
        fail("market.clearing_tol", "must be positive");
    }

    if (c.flows.period_days < 1) {
        fail("flows.period_days", "must be at least 1");
    }

    if (!(c.solvency.liquidation_rate > 0.0) || c.solvency.liquidation_rate > 1.0) {
        fail("solvency.liquidation_rate", "must lie in (0, 1]");
    }
    if (c.solvency.split_factor != 2) {
        fail("solvency.split_factor", "only 2 is supported");
    }

    if (c.run.t_max_days < 0) {
        fail("run.t_max_days", "must be non-negative");
    }

    // The Gordon valuation must be finite for every possible discount draw.
    const double annual_growth = c.dividend.growth_annual;
    if (c.population.discount_rate_range[0] <= annual_growth) {
        fail("population.discount_rate_range",
             "lower bound must exceed annual dividend growth");
    }
}

}  // namespace evology
