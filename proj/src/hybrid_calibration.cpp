#include "cfslv/hybrid_calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cfslv/black76.hpp"
#include "cfslv/errors.hpp"
#include "cfslv/index_engine.hpp"
#include "cfslv/index_pricing.hpp"
#include "cfslv/losses.hpp"
#include "cfslv/rng.hpp"
#include "cfslv/simulation.hpp"
#include "json.hpp"

namespace cfslv::calib {

ReducedParams ReducedParams::from_vector(const std::vector<double>& x) {
    if (x.size() != 4) throw ConfigError("reduced parameter vector must have 4 entries");
    return {x[0], x[1], x[2], x[3]};
}

std::vector<double> ReducedParams::to_vector() const {
    return {mean_reversion, vol_of_vol, rho_spot_var, rho_front_second};
}

std::string CalibrationReport::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["params"] = {{"a", calibrated.mean_reversion},
                   {"chi", calibrated.vol_of_vol},
                   {"rho_v", calibrated.rho_spot_var},
                   {"rho", calibrated.rho_front_second}};
    j["fixed"] = {{"kappa", fixed.kappa}, {"theta", fixed.theta}, {"v0", fixed.v0}};
    j["loss_p0"] = loss_p0;
    j["loss_p1"] = loss_p1;
    j["loss_p2"] = loss_p2;
    j["loss_trace"] = loss_trace;
    j["n_evals"] = n_evals;
    j["seconds"] = seconds;
    j["seed"] = seed;
    j["quote_files"] = quote_files;
    j["eta_file"] = eta_file;
    return j.dump(2);
}

CalibrationReport CalibrationReport::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw DataError(std::string("calibration report parse failure: ") + e.what());
    }
    CalibrationReport r;
    try {
        r.calibrated.mean_reversion = j.at("params").at("a").get<double>();
        r.calibrated.vol_of_vol = j.at("params").at("chi").get<double>();
        r.calibrated.rho_spot_var = j.at("params").at("rho_v").get<double>();
        r.calibrated.rho_front_second = j.at("params").at("rho").get<double>();
        r.fixed.kappa = j.at("fixed").at("kappa").get<double>();
        r.fixed.theta = j.at("fixed").at("theta").get<double>();
        r.fixed.v0 = j.at("fixed").at("v0").get<double>();
        r.loss_p0 = j.value("loss_p0", 0.0);
        r.loss_p1 = j.value("loss_p1", 0.0);
        r.loss_p2 = j.value("loss_p2", 0.0);
        r.loss_trace = j.value("loss_trace", std::vector<double>{});
        r.n_evals = j.value("n_evals", std::size_t{0});
        r.seconds = j.value("seconds", 0.0);
        r.seed = j.value("seed", std::uint64_t{0});
        r.quote_files = j.value("quote_files", std::vector<std::string>{});
        r.eta_file = j.value("eta_file", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("calibration report missing field: ") + e.what());
    }
    return r;
}

void CalibrationReport::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write calibration report '" + path + "'");
    out << to_json() << '\n';
}

CalibrationReport CalibrationReport::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open calibration report '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

CalibrationReport hybrid_calibrate(const Objective& objective, const HybridConfig& config) {
    config.bounds.validate();
    if (config.bounds.dimension() != 4)
        throw ConfigError("hybrid calibration expects 4 bounded coordinates (a, chi, rho_v, rho)");
    const auto start_time = std::chrono::steady_clock::now();

    CalibrationReport report;
    report.seed = config.seed;

    // p0: supplied point or a seeded uniform draw inside the bounds.
    std::vector<double> p0 = config.initial_point;
    if (p0.empty()) {
        const CounterRng rng(derive_seed(config.seed, "p0"));
        p0.resize(4);
        for (std::size_t i = 0; i < 4; ++i)
            p0[i] = config.bounds.lower[i] +
                    (config.bounds.upper[i] - config.bounds.lower[i]) * rng.uniform(0, i, 0);
    } else if (p0.size() != 4) {
        throw ConfigError("hybrid calibration: initial point must have 4 entries");
    }
    for (std::size_t i = 0; i < 4; ++i)
        if (p0[i] < config.bounds.lower[i] || p0[i] > config.bounds.upper[i])
            throw ConfigError("hybrid calibration: initial point outside bounds");

    std::size_t n_evals = 0;
    const auto counted = [&](const std::vector<double>& x) {
        ++n_evals;
        return objective(x);
    };

    report.loss_p0 = counted(p0);
    report.loss_trace.push_back(report.loss_p0);

    // Global stage.
    std::vector<double> p1 = p0;
    report.loss_p1 = report.loss_p0;
    if (!config.warm_start && config.global_budget > 0) {
        EschConfig esch = config.esch;
        esch.budget = std::max(config.global_budget,
                               esch.parents + esch.offspring);  // at least one generation
        esch.seed = derive_seed(config.seed, "esch-stage");
        const auto global = esch_minimize(counted, config.bounds, esch, &p0);
        if (global.value <= report.loss_p1) {
            p1 = global.x;
            report.loss_p1 = global.value;
        }
        for (const double v : global.best_trace)
            report.loss_trace.push_back(std::min(v, report.loss_p0));
    }

    // Local stage: subplex inside the bounds via clamping.
    std::vector<double> p2 = p1;
    report.loss_p2 = report.loss_p1;
    if (config.local_budget > 0) {
        SubplexConfig sub = config.subplex;
        sub.budget = config.local_budget;
        if (sub.scale.size() == 1 && sub.scale[0] == 0.1) {
            sub.scale.resize(4);
            for (std::size_t i = 0; i < 4; ++i)
                sub.scale[i] = 0.05 * (config.bounds.upper[i] - config.bounds.lower[i]);
        }
        const auto clamped = [&](const std::vector<double>& x) {
            std::vector<double> y = x;
            double penalty = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                const double c = std::clamp(y[i], config.bounds.lower[i], config.bounds.upper[i]);
                penalty += 1e3 * (y[i] - c) * (y[i] - c);
                y[i] = c;
            }
            ++n_evals;
            return objective(y) + penalty;
        };
        const auto local = subplex_minimize(clamped, p1, sub);
        if (local.value <= report.loss_p2) {
            for (std::size_t i = 0; i < 4; ++i)
                p2[i] = std::clamp(local.x[i], config.bounds.lower[i], config.bounds.upper[i]);
            report.loss_p2 = local.value;
        }
        for (const double v : local.best_trace)
            report.loss_trace.push_back(std::min(v, report.loss_p1));
    }

    report.calibrated = ReducedParams::from_vector(p2);
    report.n_evals = n_evals;
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return report;
}

IndexObjective::IndexObjective(IndexObjectiveSetup setup) : setup_(std::move(setup)) {
    if (setup_.index_quotes_nov.empty())
        throw DataError("index objective: no index quotes supplied");
    have_two_snapshots_ = !setup_.index_quotes_dec.empty();
    if (have_two_snapshots_ &&
        setup_.index_quotes_dec.size() != setup_.index_quotes_nov.size())
        throw DataError("index objective: snapshots differ in size");

    const auto& valuation = setup_.curve.valuation_date();
    for (std::size_t qi = 0; qi < setup_.index_quotes_nov.size(); ++qi) {
        const auto& q = setup_.index_quotes_nov.quotes[qi];
        if (q.kind != market::QuoteKind::OnIndex)
            throw DataError("index objective: quote " + std::to_string(qi) + " is not on_index");
        QuoteRow row;
        row.strike = q.strike_or_moneyness * setup_.initial_index;

        // Snap the quoted expiry to the nearest schedule business day.
        const auto& days = setup_.schedule.days();
        double best_gap = 1e9;
        for (const auto& d : days) {
            const double t = year_fraction(valuation, d.date);
            if (std::fabs(t - q.expiry) < best_gap) {
                best_gap = std::fabs(t - q.expiry);
                row.expiry_date = d.date;
                row.expiry_time = t;
            }
        }
        if (best_gap > 5.0 / 365.0)
            throw RangeError("index quote expiry " + std::to_string(q.expiry) +
                             " beyond the schedule grid");
        const double df = setup_.discount.discount(row.expiry_time);
        const auto to_price = [&](const market::VanillaQuote& quote) {
            if (quote.unit == market::QuoteUnit::Price) return quote.value;
            return pricing::black_price(setup_.initial_index, row.strike, row.expiry_time,
                                        quote.value, df, pricing::OptionType::Call);
        };
        row.nov_price = to_price(q);
        if (have_two_snapshots_) {
            const auto& qd = setup_.index_quotes_dec.quotes[qi];
            if (std::fabs(qd.expiry - q.expiry) > 1e-9 ||
                std::fabs(qd.strike_or_moneyness - q.strike_or_moneyness) > 1e-9)
                throw DataError("index objective: snapshot keys differ at quote " +
                                std::to_string(qi));
            row.dec_price = to_price(qd);
        }
        rows_.push_back(row);
    }
}

const lv::LocalVolSurface& IndexObjective::eta_for(double mean_reversion) const {
    const auto key = static_cast<long long>(std::llround(mean_reversion * 1e4));
    const auto it = eta_cache_.find(key);
    if (it != eta_cache_.end()) return it->second;
    const double quantized = static_cast<double>(key) * 1e-4;
    auto fitted = lv::calibrate_local_vol(setup_.futures_quotes, setup_.curve, setup_.discount,
                                          quantized, setup_.lv_config);
    return eta_cache_.emplace(key, std::move(fitted.surface)).first->second;
}

std::vector<double> IndexObjective::model_prices(const ReducedParams& p) const {
    mc::ModelParams params;
    params.mean_reversion = p.mean_reversion;
    params.kappa = setup_.fixed.kappa;
    params.theta = setup_.fixed.theta;
    params.v0 = setup_.fixed.v0;
    params.vol_of_vol = p.vol_of_vol;
    params.rho_spot_var = p.rho_spot_var;
    params.rho_front_second = mc::PiecewiseCorrelation(p.rho_front_second);
    params.validate();

    const auto& eta = eta_for(p.mean_reversion);

    std::vector<Date> snapshot_dates;
    for (const auto& row : rows_) snapshot_dates.push_back(row.expiry_date);
    gsci::IndexAccumulator accumulator(setup_.initial_index, snapshot_dates);
    std::vector<mc::DayObserver> observers{accumulator.observer()};
    run_two_factor_simulation(params, eta, setup_.curve, setup_.schedule, setup_.sim, observers);

    std::vector<Date> unique_dates = snapshot_dates;
    std::sort(unique_dates.begin(), unique_dates.end());
    unique_dates.erase(std::unique(unique_dates.begin(), unique_dates.end()),
                       unique_dates.end());

    std::vector<double> model(rows_.size());
    for (std::size_t qi = 0; qi < rows_.size(); ++qi) {
        const auto it = std::lower_bound(unique_dates.begin(), unique_dates.end(),
                                         rows_[qi].expiry_date);
        const auto idx = static_cast<std::size_t>(it - unique_dates.begin());
        const auto& samples = accumulator.snapshot(idx);
        const double df = setup_.discount.discount(rows_[qi].expiry_time);
        model[qi] = pricing::price_vanilla_from_samples(samples, setup_.initial_index,
                                                        rows_[qi].expiry_time, rows_[qi].strike,
                                                        df, pricing::OptionType::Call)
                        .price;
    }
    return model;
}

double IndexObjective::operator()(const std::vector<double>& x) const {
    const auto p = ReducedParams::from_vector(x);
    // Joint PSD constraint couples rho and rho_v; box bounds cannot express
    // it, so infeasible candidates are pushed back with a smooth penalty.
    if (!mc::correlation_psd(p.rho_front_second, p.rho_spot_var)) {
        const double limit = mc::max_abs_rho_spot_var(p.rho_front_second);
        const double excess = std::fabs(p.rho_spot_var) - limit;
        return 1e6 * (1.0 + excess);
    }
    const auto model = model_prices(p);
    std::vector<double> nov(rows_.size()), dec(rows_.size());
    for (std::size_t qi = 0; qi < rows_.size(); ++qi) {
        nov[qi] = rows_[qi].nov_price;
        dec[qi] = rows_[qi].dec_price;
    }
    if (have_two_snapshots_) return loss_normalized(nov, dec, model, setup_.loss_exponent);
    return loss_p(nov, model, setup_.loss_exponent);
}

}  // namespace cfslv::calib
