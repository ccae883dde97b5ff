#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace cfslv::mc {

// Piecewise-constant correlation rho(t) between the two driving factors.
// Value i applies on [times[i-1], times[i]); flat beyond the last knot.
class PiecewiseCorrelation {
public:
    PiecewiseCorrelation(double constant = 0.0) : times_{}, values_{constant} {}
    PiecewiseCorrelation(std::vector<double> times, std::vector<double> values);

    double at(double t) const;
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& times() const { return times_; }
    bool is_constant() const { return values_.size() == 1; }

private:
    std::vector<double> times_;   // right edges, size = values.size() - 1
    std::vector<double> values_;
};

// Largest |rho_v| keeping [[1,rho,rho_v],[rho,1,rho_v],[rho_v,rho_v,1]] PSD.
double max_abs_rho_spot_var(double rho_front_second);
bool correlation_psd(double rho_front_second, double rho_spot_var, double tol = 1e-12);

// Lower-triangular Cholesky factor of the 3x3 correlation matrix, with pivots
// floored at zero so the PSD boundary (|rho| = 1 and the rho_v limit) works.
std::array<std::array<double, 3>, 3> correlation_cholesky(double rho_front_second,
                                                          double rho_spot_var);

struct ModelParams {
    double mean_reversion = 0.3;  // a, spot mean-reversion speed (1/yr)
    double kappa = 1.0;           // variance mean-reversion speed (1/yr)
    double theta = 1.0;           // long-term variance
    double vol_of_vol = 0.1;      // chi
    double rho_spot_var = 0.0;    // spot-variance correlation
    double v0 = 1.0;              // initial variance
    PiecewiseCorrelation rho_front_second{0.9};
    // Correlations between contracts spaced more than one month apart stay
    // free parameters; accepted here, unused by the two-factor engine.
    std::vector<double> rho_spaced;

    // Throws ParamError on domain violations, including a non-PSD joint
    // correlation matrix at any rho(t) level.
    void validate() const;
};

struct SimConfig {
    std::size_t particles = 100000;      // N
    int substeps_per_day = 1;            // SDE steps per business day
    double mollifier_bandwidth = 0.0;    // epsilon; 0 selects the Silverman rule
    std::uint64_t seed = 42;
    std::size_t bins = 200;              // kernel accelerator bins; 0 = exact O(N^2)
    bool antithetic = false;
    int threads = 1;                     // 0 = hardware concurrency
    bool leverage_lv_only = false;       // force the variance ratio to 1 (pure LV)

    void validate() const;
};

}  // namespace cfslv::mc
