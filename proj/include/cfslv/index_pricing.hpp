#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cfslv/black76.hpp"
#include "cfslv/index_engine.hpp"
#include "cfslv/local_vol.hpp"
#include "cfslv/market_data.hpp"
#include "cfslv/model_params.hpp"
#include "cfslv/roll_schedule.hpp"

namespace cfslv::pricing {

struct OptionSpec {
    OptionType type = OptionType::Call;
    double expiry = 0.0;               // year fraction
    double strike_or_moneyness = 1.0;
    bool is_moneyness = true;          // index convention: moneyness on I_0
};

struct PricedOption {
    double price = 0.0;
    double std_error = 0.0;
    double implied_vol = 0.0;  // Black-76 with forward = I_0
};

// Monte Carlo price from terminal samples: df * mean(payoff), stderr
// df * std/sqrt(N). The implied vol uses forward = forward_ref.
PricedOption price_vanilla_from_samples(const std::vector<double>& terminal, double forward_ref,
                                        double expiry, double strike, double df, OptionType type);

// Prices index vanillas off replicated index paths. Expiries must sit on the
// stored path grid (RangeError otherwise); moneyness is taken on I_0.
std::vector<PricedOption> price_index_vanillas(const gsci::IndexPaths& paths,
                                               const std::vector<OptionSpec>& specs,
                                               const market::DiscountCurve& discount,
                                               double initial_index);

// Supplies the spot local vol for a given mean-reversion speed. Scans over
// `a` recalibrate the surface (the LV stage depends on a); scans over other
// parameters reuse the base surface.
using EtaProvider = std::function<lv::LocalVolSurface(double mean_reversion)>;

struct SensitivityConfig {
    std::vector<int> maturity_months = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<double> moneyness = {0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.2};
    int smile_month = 12;
    double initial_index = 100.0;
};

struct SensitivityCurve {
    double value_requested = 0.0;
    double value_used = 0.0;  // differs when projected onto the PSD boundary
    std::vector<double> atm_vols;         // per maturity month
    std::vector<double> atm_stderrs;      // implied-vol standard errors
    std::vector<double> smile_vols;       // per moneyness at the smile month
    std::vector<double> smile_stderrs;
};

struct SensitivityReport {
    std::string param;
    std::vector<int> maturity_months;
    std::vector<double> moneyness;
    int smile_month = 12;
    std::vector<SensitivityCurve> curves;

    std::string to_json() const;
    // One (x, implied vol) table per scanned value: atm_<param>=<v>.dat and
    // smile_<param>=<v>.dat under `directory`.
    std::vector<std::string> save_dat_files(const std::string& directory) const;
};

// Reprices the ATM term structure and the smile for each scanned value with
// common random numbers (one shared seed). Scanned values of rho_v that break
// the joint PSD constraint are projected onto the boundary and reported via
// value_used.
SensitivityReport sensitivity_scan(const mc::ModelParams& base, const EtaProvider& eta_provider,
                                   const market::FuturesCurve& curve,
                                   const market::RollSchedule& schedule,
                                   const market::DiscountCurve& discount,
                                   const Calendar& calendar, const std::string& param,
                                   const std::vector<double>& values, const mc::SimConfig& sim,
                                   const SensitivityConfig& config = {});

// Month arithmetic for expiry grids: same day `months` later (clamped to the
// month length), then rolled to the next business day.
Date add_months_business(const Date& d, int months, const Calendar& calendar);

}  // namespace cfslv::pricing
