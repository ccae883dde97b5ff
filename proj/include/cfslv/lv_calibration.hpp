#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfslv/dupire.hpp"
#include "cfslv/errors.hpp"
#include "cfslv/local_vol.hpp"
#include "cfslv/market_data.hpp"

namespace cfslv::lv {

struct LvCalibrationConfig {
    std::size_t strike_knots = 5;        // knots per expiry, clamped to [1, 9]
    double smoothness_lambda = 1e-3;     // Tikhonov weight on second differences
    double eta_min = 1e-3;
    double eta_cap = 5.0;
    double price_tolerance_rel = 1e-3;   // success test: max |dC| / F0(T)
    std::size_t budget_per_slab = 3000;  // subplex evaluations per expiry slab
    PdeGridSpec grid;                    // horizon/mandatory times set from quotes
};

struct LvCalibrationResult {
    LocalVolSurface surface;
    std::vector<double> residuals;       // model - market price per fitted quote
    double max_rel_residual = 0.0;
    std::size_t n_objective_evals = 0;
    std::uint64_t n_pde_solves = 0;
    std::vector<std::string> warnings;   // e.g. quotes dropped below the model floor
};

// Calibration failed the price tolerance; carries the best surface found.
class LvCalibrationError : public CalibrationError {
public:
    LvCalibrationError(const std::string& msg, LvCalibrationResult best_found)
        : CalibrationError(msg), best(std::move(best_found)) {}
    LvCalibrationResult best;
};

// Fits eta(t,k) to futures vanillas for a fixed mean-reversion speed by
// bootstrapping expiry slabs; every optimizer iteration performs exactly one
// extended-Dupire solve. Quotes whose effective strike falls below the model
// floor are excluded with a warning.
LvCalibrationResult calibrate_local_vol(const market::QuoteSet& quotes,
                                        const market::FuturesCurve& curve,
                                        const market::DiscountCurve& discount,
                                        double mean_reversion,
                                        const LvCalibrationConfig& config = {});

// Model-implied futures vanilla prices for a given surface (one PDE solve).
std::vector<double> reprice_futures_quotes(const market::QuoteSet& quotes,
                                           const market::FuturesCurve& curve,
                                           const market::DiscountCurve& discount,
                                           const LocalVolSurface& eta,
                                           const PdeGridSpec& grid_template);

}  // namespace cfslv::lv
