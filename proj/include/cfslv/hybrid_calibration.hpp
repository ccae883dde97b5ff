#pragma once

#include <map>
#include <string>
#include <vector>

#include "cfslv/esch.hpp"
#include "cfslv/local_vol.hpp"
#include "cfslv/lv_calibration.hpp"
#include "cfslv/market_data.hpp"
#include "cfslv/model_params.hpp"
#include "cfslv/roll_schedule.hpp"
#include "cfslv/subplex.hpp"

namespace cfslv::calib {

// Reduced parameter vector ordering used throughout: {a, chi, rho_v, rho}.
// kappa, theta and v0 stay fixed (they do not move index option prices).
struct ReducedParams {
    double mean_reversion = 0.1;
    double vol_of_vol = 0.1;
    double rho_spot_var = 0.0;
    double rho_front_second = 0.0;

    static ReducedParams from_vector(const std::vector<double>& x);
    std::vector<double> to_vector() const;
};

struct FixedParams {
    double kappa = 1.0;
    double theta = 1.0;
    double v0 = 1.0;
};

struct HybridConfig {
    Bounds bounds{{0.0, 0.0, -1.0, -1.0}, {2.0, 1.5, 1.0, 1.0}};  // a, chi, rho_v, rho
    std::size_t global_budget = 300;
    std::size_t local_budget = 200;
    EschConfig esch;        // population settings; budget comes from global_budget
    SubplexConfig subplex;  // budget comes from local_budget
    std::uint64_t seed = 42;
    bool warm_start = false;               // skip the global stage
    std::vector<double> initial_point;     // p0; random in bounds when empty
};

struct CalibrationReport {
    ReducedParams calibrated;
    FixedParams fixed;
    double loss_p0 = 0.0, loss_p1 = 0.0, loss_p2 = 0.0;
    std::vector<double> loss_trace;  // best-so-far per evaluation, both stages
    std::size_t n_evals = 0;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> quote_files;
    std::string eta_file;

    std::string to_json() const;
    static CalibrationReport from_json(const std::string& text);
    void save(const std::string& path) const;
    static CalibrationReport load(const std::string& path);
};

// Two-phase minimization of an index-quote objective: a global evolutionary
// pass followed by a subplex refinement of its best point. Guarantees
// f(p2) <= f(p1) <= f(p0).
CalibrationReport hybrid_calibrate(const Objective& objective, const HybridConfig& config);

// Everything needed to reprice the index quote set for a candidate vector.
struct IndexObjectiveSetup {
    market::FuturesCurve curve;
    market::DiscountCurve discount;
    market::RollSchedule schedule;
    market::QuoteSet futures_quotes;      // LV calibration instruments
    market::QuoteSet index_quotes_nov;    // first snapshot (or the only one)
    market::QuoteSet index_quotes_dec;    // optional second snapshot
    lv::LvCalibrationConfig lv_config;
    mc::SimConfig sim;
    FixedParams fixed;
    double initial_index = 100.0;
    double loss_exponent = 2.0;
};

// Builds the f_p / normalized fhat_p objective over the reduced vector. Each
// evaluation recalibrates eta when `a` moves (cache keyed on a quantized to
// 1e-4) and runs one Monte Carlo repricing with common random numbers.
// Candidates whose joint correlation matrix is not PSD get a large penalty.
class IndexObjective {
public:
    explicit IndexObjective(IndexObjectiveSetup setup);

    double operator()(const std::vector<double>& x) const;

    // Model index-option prices for one candidate (quote order).
    std::vector<double> model_prices(const ReducedParams& p) const;

    const lv::LocalVolSurface& eta_for(double mean_reversion) const;
    std::size_t lv_calibrations() const { return eta_cache_.size(); }
    const IndexObjectiveSetup& setup() const { return setup_; }

private:
    IndexObjectiveSetup setup_;
    struct QuoteRow {
        double expiry_time = 0.0;  // snapped to the schedule grid
        Date expiry_date;
        double strike = 0.0;
        double nov_price = 0.0;
        double dec_price = 0.0;
    };
    std::vector<QuoteRow> rows_;
    bool have_two_snapshots_ = false;
    mutable std::map<long long, lv::LocalVolSurface> eta_cache_;
};

}  // namespace cfslv::calib
