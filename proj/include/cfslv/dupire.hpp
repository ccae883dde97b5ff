#pragma once

#include <cstdint>
#include <vector>

#include "cfslv/local_vol.hpp"
#include "cfslv/market_data.hpp"

namespace cfslv::lv {

// Normalized-spot <-> futures coordinate maps for mean-reversion speed a.
// k = 1 - e^{a(T-t)} (1 - K / F0T)
double effective_strike(double t, double maturity, double strike, double f0, double a);
// F = F0T (1 - (1-s) e^{-a(T-t)})
double futures_from_spot(double s, double t, double maturity, double f0, double a);

// Local volatility of the futures price implied by the spot local vol:
// eta_F = (K - F0T (1 - e^{-a(T-t)})) * eta(t, k_F). Throws DomainError when
// the strike lies below the model floor F0T (1 - e^{-a(T-t)}).
double local_vol_futures(const LocalVolSurface& eta, double t, double maturity, double strike,
                         double f0);

struct PdeGridSpec {
    double k_min = 0.0;
    double k_max = 5.0;
    std::size_t k_cells = 400;       // number of grid intervals in k
    double steps_per_year = 400.0;   // minimum time resolution
    double horizon = 1.0;
    std::vector<double> mandatory_times;  // layers that must land exactly (quote expiries)
    int rannacher_halfsteps = 2;     // implicit startup half-steps
};

// Forward solution c(t,k) = E[(s_t - k)^+] of the extended Dupire equation
//   d_t c = (-a - a(1-k) d_k + 1/2 k^2 eta^2(t,k) d_k^2) c,  c(0,k) = (1-k)^+.
class NormalizedCallGrid {
public:
    NormalizedCallGrid(double mean_reversion, std::vector<double> strikes,
                       std::vector<double> times, std::vector<std::vector<double>> layers);

    double mean_reversion() const { return mean_reversion_; }
    const std::vector<double>& strikes() const { return strikes_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& layer(std::size_t i) const { return layers_[i]; }

    // c(t,k): linear interpolation in k and t; below k_min the linear payoff
    // regime c = c(k_min) + (k_min - k) is used (slope -1), above k_max zero.
    double value(double t, double k) const;

    // Index of the stored layer at time t (must match within 1e-12).
    std::size_t layer_index(double t) const;

private:
    double mean_reversion_;
    std::vector<double> strikes_;
    std::vector<double> times_;
    std::vector<std::vector<double>> layers_;  // [time][strike]
};

// Crank-Nicolson with Rannacher startup; central differences in k with
// upwinding of the transport term where the cell Peclet number exceeds 2.
// Boundary conditions c(t, k_min) = 1 - k_min, c(t, k_max) = 0.
NormalizedCallGrid solve_normalized_calls(const LocalVolSurface& eta, double mean_reversion,
                                          const PdeGridSpec& grid);

// Undiscounted-normalized to discounted futures-option price:
// C = P0(t) F0T e^{-a(T-t)} c(t, k_F).
double vanilla_price_on_futures(const NormalizedCallGrid& solution, double t, double maturity,
                                double strike, double f0, const market::DiscountCurve& discount,
                                bool allow_low_extrapolation = true);

// Number of PDE solves performed by this process. The LV calibration promises
// exactly one solve per objective evaluation; tests assert it through this.
std::uint64_t pde_solve_count();

}  // namespace cfslv::lv
