#include "cfslv/index_pricing.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "cfslv/errors.hpp"
#include "cfslv/simulation.hpp"
#include "json.hpp"

namespace cfslv::pricing {

PricedOption price_vanilla_from_samples(const std::vector<double>& terminal, double forward_ref,
                                        double expiry, double strike, double df,
                                        OptionType type) {
    if (terminal.empty()) throw DataError("price_vanilla_from_samples: no samples");
    const double sign = type == OptionType::Call ? 1.0 : -1.0;
    const std::size_t n = terminal.size();
    double mean = 0.0;
    for (const double x : terminal) mean += std::max(sign * (x - strike), 0.0);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const double x : terminal) {
        const double p = std::max(sign * (x - strike), 0.0) - mean;
        var += p * p;
    }
    var /= static_cast<double>(n > 1 ? n - 1 : 1);

    PricedOption out;
    out.price = df * mean;
    out.std_error = df * std::sqrt(var / static_cast<double>(n));
    try {
        out.implied_vol = implied_vol(out.price, forward_ref, strike, expiry, df, type);
    } catch (const DomainError&) {
        out.implied_vol = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

std::vector<PricedOption> price_index_vanillas(const gsci::IndexPaths& paths,
                                               const std::vector<OptionSpec>& specs,
                                               const market::DiscountCurve& discount,
                                               double initial_index) {
    std::vector<PricedOption> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        // Expiry must be a stored grid time.
        std::size_t day = paths.times.size();
        for (std::size_t d = 0; d < paths.times.size(); ++d)
            if (std::fabs(paths.times[d] - spec.expiry) < 0.5 / 365.0) {
                day = d;
                break;
            }
        if (day == paths.times.size())
            throw RangeError("option expiry " + std::to_string(spec.expiry) +
                             " not on the stored path grid");
        const double strike = spec.is_moneyness ? spec.strike_or_moneyness * initial_index
                                                : spec.strike_or_moneyness;
        out.push_back(price_vanilla_from_samples(paths.values[day], initial_index,
                                                 paths.times[day], strike,
                                                 discount.discount(paths.times[day]), spec.type));
    }
    return out;
}

Date add_months_business(const Date& d, int months, const Calendar& calendar) {
    int y = d.year();
    int m = static_cast<int>(d.month()) + months;
    y += (m - 1) / 12;
    m = (m - 1) % 12 + 1;
    if (m < 1) {
        m += 12;
        --y;
    }
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int day = static_cast<int>(d.day());
    int maxd = lengths[m - 1];
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) maxd = 29;
    day = std::min(day, maxd);
    return calendar.next_business_day(Date(y, static_cast<unsigned>(m),
                                           static_cast<unsigned>(day)));
}

namespace {

void apply_param(mc::ModelParams& params, const std::string& name, double value) {
    if (name == "a")
        params.mean_reversion = value;
    else if (name == "kappa")
        params.kappa = value;
    else if (name == "theta")
        params.theta = value;
    else if (name == "chi")
        params.vol_of_vol = value;
    else if (name == "rho_v")
        params.rho_spot_var = value;
    else if (name == "v0")
        params.v0 = value;
    else if (name == "rho")
        params.rho_front_second = mc::PiecewiseCorrelation(value);
    else
        throw ConfigError("unknown scan parameter '" + name +
                          "' (expected a|rho|kappa|theta|chi|rho_v|v0)");
}

}  // namespace

SensitivityReport sensitivity_scan(const mc::ModelParams& base, const EtaProvider& eta_provider,
                                   const market::FuturesCurve& curve,
                                   const market::RollSchedule& schedule,
                                   const market::DiscountCurve& discount,
                                   const Calendar& calendar, const std::string& param,
                                   const std::vector<double>& values, const mc::SimConfig& sim,
                                   const SensitivityConfig& config) {
    if (values.empty()) throw ConfigError("sensitivity scan: empty value list");
    {
        mc::ModelParams probe = base;  // reject unknown names before simulating
        apply_param(probe, param, values.front());
    }

    SensitivityReport report;
    report.param = param;
    report.maturity_months = config.maturity_months;
    report.moneyness = config.moneyness;
    report.smile_month = config.smile_month;

    // Expiry dates shared by every curve in the scan.
    const Date& valuation = curve.valuation_date();
    std::vector<Date> expiry_dates;
    for (const int m : config.maturity_months)
        expiry_dates.push_back(add_months_business(valuation, m, calendar));
    const Date smile_date = add_months_business(valuation, config.smile_month, calendar);
    std::vector<Date> snapshot_dates = expiry_dates;
    snapshot_dates.push_back(smile_date);
    std::sort(snapshot_dates.begin(), snapshot_dates.end());
    snapshot_dates.erase(std::unique(snapshot_dates.begin(), snapshot_dates.end()),
                         snapshot_dates.end());
    for (const auto& d : snapshot_dates)
        if (d > schedule.last_date())
            throw RangeError("scan expiry " + d.to_iso() + " beyond the schedule horizon");

    for (const double value : values) {
        mc::ModelParams params = base;
        apply_param(params, param, value);

        SensitivityCurve curve_out;
        curve_out.value_requested = value;
        curve_out.value_used = value;
        if (param == "rho_v") {
            // Project onto the PSD boundary of the joint correlation matrix.
            double limit = 1.0;
            for (const double rho : params.rho_front_second.values())
                limit = std::min(limit, mc::max_abs_rho_spot_var(rho));
            if (std::fabs(value) > limit) {
                curve_out.value_used = std::copysign(limit, value);
                params.rho_spot_var = curve_out.value_used;
            }
        }
        params.validate();

        const auto eta = eta_provider(params.mean_reversion);

        gsci::IndexAccumulator accumulator(config.initial_index,
                                           {snapshot_dates.begin(), snapshot_dates.end()});
        std::vector<mc::DayObserver> observers{accumulator.observer()};
        run_two_factor_simulation(params, eta, curve, schedule, sim, observers);

        const auto snapshot_of = [&](const Date& d) -> std::pair<const std::vector<double>&,
                                                                 double> {
            const auto it = std::lower_bound(snapshot_dates.begin(), snapshot_dates.end(), d);
            const auto idx = static_cast<std::size_t>(it - snapshot_dates.begin());
            return {accumulator.snapshot(idx), accumulator.snapshot_time(idx)};
        };

        for (const auto& d : expiry_dates) {
            const auto [samples, t] = snapshot_of(d);
            const auto priced =
                price_vanilla_from_samples(samples, config.initial_index, t,
                                           config.initial_index, discount.discount(t),
                                           OptionType::Call);
            curve_out.atm_vols.push_back(priced.implied_vol);
            const double vega = black_vega(config.initial_index, config.initial_index, t,
                                           std::max(priced.implied_vol, 1e-4),
                                           discount.discount(t));
            curve_out.atm_stderrs.push_back(vega > 0.0 ? priced.std_error / vega : 0.0);
        }
        {
            const auto [samples, t] = snapshot_of(smile_date);
            for (const double m : config.moneyness) {
                const auto priced = price_vanilla_from_samples(
                    samples, config.initial_index, t, m * config.initial_index,
                    discount.discount(t), OptionType::Call);
                curve_out.smile_vols.push_back(priced.implied_vol);
                const double vega =
                    black_vega(config.initial_index, m * config.initial_index, t,
                               std::max(priced.implied_vol, 1e-4), discount.discount(t));
                curve_out.smile_stderrs.push_back(vega > 0.0 ? priced.std_error / vega : 0.0);
            }
        }
        report.curves.push_back(std::move(curve_out));
    }
    return report;
}

std::string SensitivityReport::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["param"] = param;
    j["maturity_months"] = maturity_months;
    j["moneyness"] = moneyness;
    j["smile_month"] = smile_month;
    for (const auto& c : curves) {
        nlohmann::json jc;
        jc["value_requested"] = c.value_requested;
        jc["value_used"] = c.value_used;
        jc["atm_vols"] = c.atm_vols;
        jc["atm_stderrs"] = c.atm_stderrs;
        jc["smile_vols"] = c.smile_vols;
        jc["smile_stderrs"] = c.smile_stderrs;
        j["curves"].push_back(jc);
    }
    return j.dump(2);
}

std::vector<std::string> SensitivityReport::save_dat_files(const std::string& directory) const {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    std::vector<std::string> written;
    char buf[128];
    for (const auto& c : curves) {
        std::snprintf(buf, sizeof(buf), "%s/atm_%s=%g.dat", directory.c_str(), param.c_str(),
                      c.value_requested);
        {
            std::ofstream out(buf);
            if (!out) throw DataError(std::string("cannot write ") + buf);
            out << "t y\n";
            for (std::size_t i = 0; i < c.atm_vols.size(); ++i)
                out << maturity_months[i] << ' ' << c.atm_vols[i] << '\n';
            written.emplace_back(buf);
        }
        std::snprintf(buf, sizeof(buf), "%s/smile_%s=%g.dat", directory.c_str(), param.c_str(),
                      c.value_requested);
        {
            std::ofstream out(buf);
            if (!out) throw DataError(std::string("cannot write ") + buf);
            out << "moneyness y\n";
            for (std::size_t i = 0; i < moneyness.size(); ++i)
                out << moneyness[i] << ' ' << c.smile_vols[i] << '\n';
            written.emplace_back(buf);
        }
    }
    return written;
}

}  // namespace cfslv::pricing
