// cfslv: batch front end for the commodity-futures SLV pricing and
// calibration pipeline. Subcommands wire file-based market data into the
// library modules; all randomness derives from --seed.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfslv/black76.hpp"
#include "cfslv/dates.hpp"
#include "cfslv/dupire.hpp"
#include "cfslv/errors.hpp"
#include "cfslv/hybrid_calibration.hpp"
#include "cfslv/index_engine.hpp"
#include "cfslv/index_pricing.hpp"
#include "cfslv/local_vol.hpp"
#include "cfslv/lv_calibration.hpp"
#include "cfslv/market_data.hpp"
#include "cfslv/model_params.hpp"
#include "cfslv/roll_schedule.hpp"
#include "cfslv/rng.hpp"
#include "cfslv/simulation.hpp"
#include "json.hpp"

namespace {

using namespace cfslv;

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitNumerics = 3;
constexpr int kExitCalibration = 4;
constexpr int kExitUsage = 64;

// Flat key = value configuration text: one assignment per line, '#' comments,
// optional double quotes around strings, comma-separated lists.
class KeyValueConfig {
public:
    static KeyValueConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open config file '" + path + "'");
        KeyValueConfig cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trim = [](std::string s) {
                const auto first = s.find_first_not_of(" \t\r");
                if (first == std::string::npos) return std::string{};
                const auto last = s.find_last_not_of(" \t\r");
                return s.substr(first, last - first + 1);
            };
            const std::string stripped = trim(line);
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw DataError("config line " + std::to_string(line_no) +
                                ": expected 'key = value'");
            std::string key = trim(stripped.substr(0, eq));
            std::string value = trim(stripped.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            if (key.empty()) throw DataError("config line " + std::to_string(line_no) +
                                             ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback = "") const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    double num(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw DataError("config key '" + key + "': cannot parse number '" + it->second +
                            "'");
        }
    }
    long integer(const std::string& key, long fallback) const {
        return static_cast<long>(num(key, static_cast<double>(fallback)));
    }
    bool boolean(const std::string& key, bool fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw DataError("config key '" + key + "': expected true/false");
    }
    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        const auto it = values_.find(key);
        if (it == values_.end()) return out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        return out;
    }

private:
    std::map<std::string, std::string> values_;
};

struct RunContext {
    KeyValueConfig cfg;
    std::string config_dir;
    std::uint64_t seed = 42;
    int threads = 1;
    bool dry_run = false;

    std::string path(const std::string& key) const {
        const std::string value = cfg.str(key);
        if (value.empty()) throw DataError("config is missing required key '" + key + "'");
        std::filesystem::path p(value);
        if (p.is_relative()) p = std::filesystem::path(config_dir) / p;
        return p.string();
    }

    Date valuation_date() const {
        const std::string v = cfg.str("valuation_date");
        if (v.empty()) throw DataError("config is missing 'valuation_date'");
        return Date::from_iso(v);
    }

    Calendar calendar() const {
        if (cfg.has("holiday_file")) return Calendar::from_holiday_file(path("holiday_file"));
        return Calendar{};
    }

    market::FuturesCurve futures_curve() const {
        return market::load_futures_curve(path("futures_curve"), valuation_date());
    }
    market::DiscountCurve discount_curve() const {
        return market::load_discount_curve(path("discount_curve"));
    }

    market::RollSchedule schedule(const market::FuturesCurve& curve) const {
        const int months = static_cast<int>(cfg.integer("horizon_months", 14));
        const Date start = valuation_date();
        int y = start.year();
        int m = static_cast<int>(start.month()) + months;
        y += (m - 1) / 12;
        m = (m - 1) % 12 + 1;
        const Date end(y, static_cast<unsigned>(m), 15);
        return market::build_roll_schedule(calendar(), curve, start, end);
    }

    mc::ModelParams model_params() const {
        mc::ModelParams p;
        p.mean_reversion = cfg.num("a", 0.3);
        p.kappa = cfg.num("kappa", 1.0);
        p.theta = cfg.num("theta", 1.0);
        p.vol_of_vol = cfg.num("chi", 0.1);
        p.rho_spot_var = cfg.num("rho_v", 0.0);
        p.v0 = cfg.num("v0", 1.0);
        p.rho_front_second = mc::PiecewiseCorrelation(cfg.num("rho", 0.9));
        p.rho_spaced = cfg.numbers("rho_spaced");
        p.validate();
        return p;
    }

    mc::SimConfig sim_config() const {
        mc::SimConfig s;
        s.particles = static_cast<std::size_t>(cfg.integer("particles", 100000));
        s.substeps_per_day = static_cast<int>(cfg.integer("substeps_per_day", 1));
        s.mollifier_bandwidth = cfg.num("mollifier_bandwidth", 0.0);
        s.bins = static_cast<std::size_t>(cfg.integer("bins", 200));
        s.antithetic = cfg.boolean("antithetic", false);
        s.seed = derive_seed(seed, "mc");
        s.threads = threads;
        s.validate();
        return s;
    }

    lv::LvCalibrationConfig lv_config() const {
        lv::LvCalibrationConfig c;
        c.strike_knots = static_cast<std::size_t>(cfg.integer("lv_strike_knots", 5));
        c.smoothness_lambda = cfg.num("lv_lambda", 1e-3);
        c.price_tolerance_rel = cfg.num("lv_tolerance", 1e-3);
        c.budget_per_slab = static_cast<std::size_t>(cfg.integer("lv_budget", 3000));
        c.grid.k_max = cfg.num("lv_k_max", 3.0);
        c.grid.k_cells = static_cast<std::size_t>(cfg.integer("lv_k_cells", 300));
        c.grid.steps_per_year = cfg.num("lv_steps_per_year", 250.0);
        return c;
    }

    std::string output_dir() const {
        const std::string dir = cfg.str("output_dir", ".");
        std::filesystem::path p(dir);
        if (p.is_relative()) p = std::filesystem::path(config_dir) / p;
        std::filesystem::create_directories(p);
        return p.string();
    }
};

RunContext make_context(const std::string& config_path, std::uint64_t seed, int threads,
                        bool dry_run, bool seed_given, bool threads_given) {
    RunContext ctx;
    ctx.cfg = KeyValueConfig::from_file(config_path);
    ctx.config_dir = std::filesystem::absolute(config_path).parent_path().string();
    ctx.seed = seed_given ? seed : static_cast<std::uint64_t>(ctx.cfg.integer("seed", 42));
    ctx.threads = threads_given ? threads : static_cast<int>(ctx.cfg.integer("threads", 1));
    ctx.dry_run = dry_run;
    return ctx;
}

int cmd_calibrate_lv(const RunContext& ctx, const std::string& output_override) {
    const auto curve = ctx.futures_curve();
    const auto discount = ctx.discount_curve();
    const auto quotes = market::load_quotes(ctx.path("futures_quotes"), ctx.valuation_date());
    const double a = ctx.cfg.num("a", 0.3);
    if (ctx.dry_run) {
        std::cout << "dry run: inputs valid (" << quotes.size() << " quotes)\n";
        return kExitOk;
    }
    const auto result = lv::calibrate_local_vol(quotes, curve, discount, a, ctx.lv_config());
    const std::string out = output_override.empty()
                                ? ctx.output_dir() + "/local_vol.json"
                                : output_override;
    result.surface.save(out);

    nlohmann::json residuals;
    residuals["format_version"] = 1;
    residuals["max_rel_residual"] = result.max_rel_residual;
    residuals["residuals"] = result.residuals;
    residuals["n_objective_evals"] = result.n_objective_evals;
    residuals["n_pde_solves"] = result.n_pde_solves;
    residuals["warnings"] = result.warnings;
    std::ofstream rep(ctx.output_dir() + "/lv_residuals.json");
    rep << residuals.dump(2) << '\n';

    std::cout << "wrote " << out << " (max rel residual " << result.max_rel_residual << ")\n";
    return kExitOk;
}

int cmd_calibrate_index(const RunContext& ctx, const std::string& warm_start_file,
                        bool random_p0, long global_budget, long local_budget,
                        const std::string& output_override) {
    calib::IndexObjectiveSetup setup{
        ctx.futures_curve(),          ctx.discount_curve(),
        ctx.schedule(ctx.futures_curve()),
        market::load_quotes(ctx.path("futures_quotes"), ctx.valuation_date()),
        market::load_quotes(ctx.path("index_quotes_nov"), ctx.valuation_date()),
        market::QuoteSet{},
        ctx.lv_config(),              ctx.sim_config(),
        calib::FixedParams{ctx.cfg.num("kappa", 1.0), ctx.cfg.num("theta", 1.0),
                           ctx.cfg.num("v0", 1.0)},
        ctx.cfg.num("initial_index", 100.0),
        ctx.cfg.num("loss_p", 2.0)};
    if (ctx.cfg.has("index_quotes_dec"))
        setup.index_quotes_dec =
            market::load_quotes(ctx.path("index_quotes_dec"), ctx.valuation_date());

    calib::HybridConfig config;
    const auto lo = ctx.cfg.numbers("bounds_lower");
    const auto hi = ctx.cfg.numbers("bounds_upper");
    if (!lo.empty() || !hi.empty()) {
        if (lo.size() != 4 || hi.size() != 4)
            throw DataError("bounds_lower/bounds_upper need 4 entries (a, chi, rho_v, rho)");
        config.bounds = calib::Bounds{lo, hi};
    }
    config.global_budget = static_cast<std::size_t>(
        global_budget >= 0 ? global_budget : ctx.cfg.integer("global_budget", 300));
    config.local_budget = static_cast<std::size_t>(
        local_budget >= 0 ? local_budget : ctx.cfg.integer("local_budget", 200));
    config.seed = derive_seed(ctx.seed, "hybrid");
    config.esch.parents = static_cast<std::size_t>(ctx.cfg.integer("esch_parents", 20));
    config.esch.offspring = static_cast<std::size_t>(ctx.cfg.integer("esch_offspring", 40));

    if (!warm_start_file.empty()) {
        const auto previous = calib::CalibrationReport::load(warm_start_file);
        config.warm_start = true;
        config.initial_point = previous.calibrated.to_vector();
    } else if (!random_p0 && ctx.cfg.has("p0")) {
        config.initial_point = ctx.cfg.numbers("p0");
    }

    if (ctx.dry_run) {
        std::cout << "dry run: inputs valid (" << setup.index_quotes_nov.size()
                  << " index quotes)\n";
        return kExitOk;
    }

    const calib::IndexObjective objective(setup);
    auto report = calib::hybrid_calibrate(std::cref(objective), config);
    report.quote_files = {ctx.path("index_quotes_nov")};
    if (ctx.cfg.has("index_quotes_dec")) report.quote_files.push_back(ctx.path("index_quotes_dec"));
    report.seed = ctx.seed;

    const std::string eta_out = ctx.output_dir() + "/local_vol_calibrated.json";
    objective.eta_for(report.calibrated.mean_reversion).save(eta_out);
    report.eta_file = eta_out;

    const std::string out = output_override.empty()
                                ? ctx.output_dir() + "/calibration_report.json"
                                : output_override;
    report.save(out);
    std::cout << "wrote " << out << " (loss " << report.loss_p2 << ", " << report.n_evals
              << " evaluations)\n";
    return kExitOk;
}

int cmd_sensitivity(const RunContext& ctx, const std::string& param,
                    const std::vector<double>& values, const std::string& out_dir_override) {
    if (values.empty()) throw CLI::ValidationError("--values must not be empty");
    static const std::vector<std::string> known{"a", "rho", "kappa", "theta",
                                                "chi", "rho_v", "v0"};
    if (std::find(known.begin(), known.end(), param) == known.end())
        throw CLI::ValidationError("--param must be one of a|rho|kappa|theta|chi|rho_v|v0");
    const auto curve = ctx.futures_curve();
    const auto discount = ctx.discount_curve();
    const auto schedule = ctx.schedule(curve);
    const auto base = ctx.model_params();
    const auto sim = ctx.sim_config();

    pricing::SensitivityConfig cfg;
    cfg.initial_index = ctx.cfg.num("initial_index", 100.0);
    if (ctx.cfg.has("scan_months")) {
        cfg.maturity_months.clear();
        for (const double m : ctx.cfg.numbers("scan_months"))
            cfg.maturity_months.push_back(static_cast<int>(m));
    }
    if (ctx.cfg.has("scan_moneyness")) cfg.moneyness = ctx.cfg.numbers("scan_moneyness");

    // a-scans refit the local vol per value; other scans reuse the base fit.
    const auto quotes = market::load_quotes(ctx.path("futures_quotes"), ctx.valuation_date());
    const auto lv_cfg = ctx.lv_config();
    std::map<long long, lv::LocalVolSurface> cache;
    const pricing::EtaProvider provider = [&](double a) -> lv::LocalVolSurface {
        const auto key = static_cast<long long>(std::llround(a * 1e4));
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto fitted = lv::calibrate_local_vol(quotes, curve, discount,
                                              static_cast<double>(key) * 1e-4, lv_cfg);
        return cache.emplace(key, std::move(fitted.surface)).first->second;
    };

    if (ctx.dry_run) {
        std::cout << "dry run: inputs valid (param " << param << ", " << values.size()
                  << " values)\n";
        return kExitOk;
    }

    const auto report = pricing::sensitivity_scan(base, provider, curve, schedule, discount,
                                                  ctx.calendar(), param, values, sim, cfg);
    const std::string dir = out_dir_override.empty() ? ctx.output_dir() : out_dir_override;
    std::filesystem::create_directories(dir);
    std::ofstream json_out(dir + "/sensitivity_" + param + ".json");
    json_out << report.to_json() << '\n';
    const auto files = report.save_dat_files(dir);
    std::cout << "wrote " << files.size() << " dat files and sensitivity_" << param
              << ".json under " << dir << '\n';
    return kExitOk;
}

int cmd_price(const RunContext& ctx, const std::string& specs_file, const std::string& eta_file,
              const std::string& output_override) {
    const auto curve = ctx.futures_curve();
    const auto discount = ctx.discount_curve();
    const auto schedule = ctx.schedule(curve);
    const auto params = ctx.model_params();
    const auto sim = ctx.sim_config();
    const double initial_index = ctx.cfg.num("initial_index", 100.0);

    // calibrated artifact required
    const std::string eta_path = !eta_file.empty()
                                     ? eta_file
                                     : (ctx.cfg.has("eta_file") ? ctx.path("eta_file") : "");
    if (eta_path.empty()) throw DataError("price needs --eta or config key 'eta_file'");
    const auto eta = lv::LocalVolSurface::load(eta_path);

    // specs CSV: callput,expiry,strike_or_moneyness,unit(moneyness|strike)
    std::ifstream in(specs_file);
    if (!in) throw DataError("cannot open specs file '" + specs_file + "'");
    std::vector<pricing::OptionSpec> specs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line.rfind("callput", 0) == 0) continue;
        std::stringstream ss(line);
        std::string callput, expiry, strike, unit;
        if (!std::getline(ss, callput, ',') || !std::getline(ss, expiry, ',') ||
            !std::getline(ss, strike, ',') || !std::getline(ss, unit))
            throw DataError("specs row " + std::to_string(line_no) +
                            ": expected callput,expiry,strike_or_moneyness,unit");
        pricing::OptionSpec spec;
        if (callput == "call")
            spec.type = pricing::OptionType::Call;
        else if (callput == "put")
            spec.type = pricing::OptionType::Put;
        else
            throw DataError("specs row " + std::to_string(line_no) + ": unknown callput '" +
                            callput + "'");
        spec.expiry = std::stod(expiry);
        spec.strike_or_moneyness = std::stod(strike);
        if (unit == "moneyness")
            spec.is_moneyness = true;
        else if (unit == "strike")
            spec.is_moneyness = false;
        else
            throw DataError("specs row " + std::to_string(line_no) + ": unknown unit '" + unit +
                            "'");
        specs.push_back(spec);
    }
    if (specs.empty()) throw DataError("specs file has no rows");
    double max_expiry = 0.0;
    for (const auto& s : specs) max_expiry = std::max(max_expiry, s.expiry);
    if (max_expiry > year_fraction(curve.valuation_date(), schedule.last_date()))
        throw RangeError("spec expiry " + std::to_string(max_expiry) +
                         " beyond the simulation horizon; raise horizon_months");

    if (ctx.dry_run) {
        std::cout << "dry run: inputs valid (" << specs.size() << " specs)\n";
        return kExitOk;
    }

    // snap expiries to schedule days
    std::vector<Date> snapshot_dates;
    const Date valuation = curve.valuation_date();
    for (auto& s : specs) {
        double best = 1e18;
        Date best_date = schedule.first_date();
        for (const auto& day : schedule.days()) {
            const double t = year_fraction(valuation, day.date);
            if (std::fabs(t - s.expiry) < best) {
                best = std::fabs(t - s.expiry);
                best_date = day.date;
            }
        }
        if (best > 5.0 / 365.0)
            throw RangeError("spec expiry " + std::to_string(s.expiry) + " not near the grid");
        s.expiry = year_fraction(valuation, best_date);
        snapshot_dates.push_back(best_date);
    }

    gsci::IndexAccumulator accumulator(initial_index, snapshot_dates);
    std::vector<mc::DayObserver> observers{accumulator.observer()};
    mc::run_two_factor_simulation(params, eta, curve, schedule, sim, observers);

    std::vector<Date> unique_dates = snapshot_dates;
    std::sort(unique_dates.begin(), unique_dates.end());
    unique_dates.erase(std::unique(unique_dates.begin(), unique_dates.end()),
                       unique_dates.end());

    const std::string out = output_override.empty() ? ctx.output_dir() + "/priced.csv"
                                                    : output_override;
    std::ofstream csv(out);
    csv << "# format_version 1\n";
    csv << "callput,expiry,strike_or_moneyness,unit,price,std_error,implied_vol\n";
    char buf[256];
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        const auto it = std::lower_bound(unique_dates.begin(), unique_dates.end(),
                                         snapshot_dates[i]);
        const auto& samples =
            accumulator.snapshot(static_cast<std::size_t>(it - unique_dates.begin()));
        const double strike = s.is_moneyness ? s.strike_or_moneyness * initial_index
                                             : s.strike_or_moneyness;
        const auto priced = pricing::price_vanilla_from_samples(
            samples, initial_index, s.expiry, strike, discount.discount(s.expiry), s.type);
        std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%s,%.12g,%.12g,%.12g\n",
                      s.type == pricing::OptionType::Call ? "call" : "put", s.expiry,
                      s.strike_or_moneyness, s.is_moneyness ? "moneyness" : "strike",
                      priced.price, priced.std_error, priced.implied_vol);
        csv << buf;
    }
    std::cout << "wrote " << out << '\n';
    return kExitOk;
}

int cmd_synth(const RunContext& ctx, const std::string& kind, const std::string& out_file,
              double sigma, double spread) {
    const auto curve = ctx.futures_curve();
    const auto discount = ctx.discount_curve();
    const Date valuation = curve.valuation_date();

    if (ctx.dry_run) {
        std::cout << "dry run: inputs valid\n";
        return kExitOk;
    }

    market::QuoteSet quotes;
    if (kind == "futures") {
        // model-consistent prices from a flat spot local vol at the config a
        const double a = ctx.cfg.num("a", 0.3);
        const auto eta = lv::LocalVolSurface::flat(sigma, a);
        const auto expiries = ctx.cfg.numbers("synth_expiries");
        const auto moneyness = ctx.cfg.numbers("synth_moneyness");
        const std::vector<double> exp_list = expiries.empty()
                                                 ? std::vector<double>{0.25, 0.5, 1.0}
                                                 : expiries;
        const std::vector<double> mon_list =
            moneyness.empty() ? std::vector<double>{0.85, 0.95, 1.0, 1.05, 1.15} : moneyness;
        for (const double t : exp_list) {
            // first contract maturing after the expiry
            const std::size_t ci = curve.first_contract_after(
                valuation + static_cast<std::int64_t>(t * 365.0 + 3.0));
            for (const double m : mon_list) {
                market::VanillaQuote q;
                q.kind = market::QuoteKind::OnFutures;
                q.expiry = t;
                q.underlying = curve.maturities()[ci];
                q.strike_or_moneyness = m * curve.price(ci);
                q.unit = market::QuoteUnit::Price;
                q.value = 1.0;
                q.quote_date = valuation;
                quotes.quotes.push_back(q);
            }
        }
        lv::PdeGridSpec grid;
        grid.k_max = 3.0;
        grid.k_cells = 400;
        grid.steps_per_year = 400;
        const auto prices = lv::reprice_futures_quotes(quotes, curve, discount, eta, grid);
        for (std::size_t i = 0; i < prices.size(); ++i) quotes.quotes[i].value = prices[i];
        market::save_quotes(quotes, out_file);
    } else if (kind == "index") {
        // two consensus-style snapshots around the model price at the config
        // parameters: nov = (1-spread) * price, dec = (1+spread) * price
        const auto schedule = ctx.schedule(curve);
        const auto params = ctx.model_params();
        const auto sim = ctx.sim_config();
        const double initial_index = ctx.cfg.num("initial_index", 100.0);
        const Calendar calendar = ctx.calendar();

        const auto quotes_futures =
            market::load_quotes(ctx.path("futures_quotes"), valuation);
        auto lv_result = lv::calibrate_local_vol(quotes_futures, curve, discount,
                                                 params.mean_reversion, ctx.lv_config());

        const auto expiries = ctx.cfg.numbers("synth_index_expiries");
        const auto moneyness = ctx.cfg.numbers("synth_index_moneyness");
        const std::vector<double> exp_list =
            expiries.empty() ? std::vector<double>{0.5, 1.0} : expiries;
        const std::vector<double> mon_list =
            moneyness.empty() ? std::vector<double>{0.9, 0.95, 1.0, 1.05, 1.1} : moneyness;

        std::vector<Date> dates;
        for (const double t : exp_list)
            dates.push_back(pricing::add_months_business(
                valuation, static_cast<int>(std::lround(t * 12.0)), calendar));
        gsci::IndexAccumulator accumulator(initial_index, dates);
        std::vector<mc::DayObserver> observers{accumulator.observer()};
        mc::run_two_factor_simulation(params, lv_result.surface, curve, schedule, sim,
                                      observers);

        std::vector<Date> unique_dates = dates;
        std::sort(unique_dates.begin(), unique_dates.end());
        unique_dates.erase(std::unique(unique_dates.begin(), unique_dates.end()),
                           unique_dates.end());

        market::QuoteSet nov, dec;
        for (std::size_t e = 0; e < exp_list.size(); ++e) {
            const auto it = std::lower_bound(unique_dates.begin(), unique_dates.end(), dates[e]);
            const auto idx = static_cast<std::size_t>(it - unique_dates.begin());
            const double t = accumulator.snapshot_time(idx);
            for (const double m : mon_list) {
                const auto priced = pricing::price_vanilla_from_samples(
                    accumulator.snapshot(idx), initial_index, t, m * initial_index,
                    discount.discount(t), pricing::OptionType::Call);
                market::VanillaQuote q;
                q.kind = market::QuoteKind::OnIndex;
                q.expiry = t;
                q.strike_or_moneyness = m;
                q.unit = market::QuoteUnit::Price;
                q.value = (1.0 - spread) * priced.price;
                q.quote_date = Date(2019, 11, 30);
                nov.quotes.push_back(q);
                q.value = (1.0 + spread) * priced.price;
                q.quote_date = Date(2019, 12, 31);
                dec.quotes.push_back(q);
            }
        }
        const auto dot = out_file.rfind('.');
        const std::string stem = dot == std::string::npos ? out_file : out_file.substr(0, dot);
        const std::string ext = dot == std::string::npos ? ".csv" : out_file.substr(dot);
        market::save_quotes(nov, stem + "_nov" + ext);
        market::save_quotes(dec, stem + "_dec" + ext);
        std::cout << "wrote " << stem << "_nov" << ext << " and " << stem << "_dec" << ext
                  << '\n';
        return kExitOk;
    } else {
        throw CLI::ValidationError("--kind must be 'futures' or 'index'");
    }
    std::cout << "wrote " << out_file << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Commodity futures SLV pricing and GSCI index calibration"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 42;
    int threads = 1;
    bool dry_run = false;
    app.add_option("--config", config_path, "key = value run configuration")->required();
    auto* seed_opt = app.add_option("--seed", seed, "master seed (labeled hashing derives all streams)");
    auto* threads_opt = app.add_option("--threads", threads, "parallelism cap (never changes results)");
    app.add_flag("--dry-run", dry_run, "validate inputs and write nothing");

    auto* lv_cmd = app.add_subcommand("calibrate-lv", "fit the spot local vol to futures vanillas");
    std::string lv_output;
    lv_cmd->add_option("--output", lv_output, "surface JSON path");

    auto* index_cmd = app.add_subcommand("calibrate-index",
                                         "hybrid global/local fit of {a, chi, rho_v, rho}");
    std::string warm_start, index_output;
    bool random_p0 = false;
    long global_budget = -1, local_budget = -1;
    auto* warm_opt = index_cmd->add_option("--warm-start", warm_start,
                                           "previous report JSON; subplex-only refinement");
    auto* random_opt = index_cmd->add_flag("--random-p0", random_p0, "draw p0 from the bounds");
    index_cmd->add_option("--global-budget", global_budget, "ESCH evaluation budget");
    index_cmd->add_option("--local-budget", local_budget, "subplex evaluation budget");
    index_cmd->add_option("--output", index_output, "report JSON path");
    warm_opt->excludes(random_opt);

    auto* sens_cmd = app.add_subcommand("sensitivity", "parameter scans of the index smile");
    std::string param, sens_dir;
    std::vector<double> values;
    sens_cmd->add_option("--param", param, "one of a|rho|kappa|theta|chi|rho_v|v0")->required();
    sens_cmd->add_option("--values", values, "comma separated scan values")
        ->required()
        ->delimiter(',');
    sens_cmd->add_option("--out-dir", sens_dir, "output directory");

    auto* price_cmd = app.add_subcommand("price", "Monte Carlo pricing of index vanillas");
    std::string specs_file, eta_file, price_output;
    price_cmd->add_option("--specs", specs_file, "option spec CSV")->required();
    price_cmd->add_option("--eta", eta_file, "calibrated local vol JSON");
    price_cmd->add_option("--output", price_output, "priced CSV path");

    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic quote fixtures");
    std::string synth_kind, synth_out;
    double synth_sigma = 0.25, synth_spread = 0.02;
    synth_cmd->add_option("--kind", synth_kind, "futures | index")->required();
    synth_cmd->add_option("--out", synth_out, "output CSV")->required();
    synth_cmd->add_option("--sigma", synth_sigma, "flat spot vol for futures quotes");
    synth_cmd->add_option("--spread", synth_spread, "consensus half-width for index quotes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        const RunContext ctx = make_context(config_path, seed, threads, dry_run,
                                            seed_opt->count() > 0, threads_opt->count() > 0);
        if (lv_cmd->parsed()) return cmd_calibrate_lv(ctx, lv_output);
        if (index_cmd->parsed())
            return cmd_calibrate_index(ctx, warm_start, random_p0, global_budget, local_budget,
                                       index_output);
        if (sens_cmd->parsed()) return cmd_sensitivity(ctx, param, values, sens_dir);
        if (price_cmd->parsed()) return cmd_price(ctx, specs_file, eta_file, price_output);
        if (synth_cmd->parsed())
            return cmd_synth(ctx, synth_kind, synth_out, synth_sigma, synth_spread);
        return kExitUsage;
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericsError& e) {
        std::cerr << "numerics error: " << e.what() << '\n';
        return kExitNumerics;
    } catch (const CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << '\n';
        return kExitCalibration;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
