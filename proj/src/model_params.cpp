#include "cfslv/model_params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfslv/errors.hpp"

namespace cfslv::mc {

PiecewiseCorrelation::PiecewiseCorrelation(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (values_.empty()) throw ParamError("correlation function needs at least one value");
    if (times_.size() + 1 != values_.size())
        throw ParamError("correlation function: times must have one entry fewer than values");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw ParamError("correlation function: times not strictly ascending");
}

double PiecewiseCorrelation::at(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return values_[static_cast<std::size_t>(it - times_.begin())];
}

double max_abs_rho_spot_var(double rho_front_second) {
    // PSD condition for [[1,r,q],[r,1,q],[q,q,1]]: 2 q^2 <= 1 + r.
    return std::sqrt(std::max(0.0, 0.5 * (1.0 + rho_front_second)));
}

bool correlation_psd(double rho_front_second, double rho_spot_var, double tol) {
    if (std::fabs(rho_front_second) > 1.0 + tol || std::fabs(rho_spot_var) > 1.0 + tol)
        return false;
    const double limit = max_abs_rho_spot_var(rho_front_second);
    return rho_spot_var * rho_spot_var <= limit * limit + tol;
}

std::array<std::array<double, 3>, 3> correlation_cholesky(double rho_front_second,
                                                          double rho_spot_var) {
    const double r = rho_front_second;
    const double q = rho_spot_var;
    std::array<std::array<double, 3>, 3> l{};
    l[0][0] = 1.0;
    l[1][0] = r;
    l[1][1] = std::sqrt(std::max(0.0, 1.0 - r * r));
    l[2][0] = q;
    l[2][1] = l[1][1] > 0.0 ? (q - r * q) / l[1][1] : 0.0;
    l[2][2] = std::sqrt(std::max(0.0, 1.0 - l[2][0] * l[2][0] - l[2][1] * l[2][1]));
    return l;
}

void ModelParams::validate() const {
    if (!(kappa > 0.0)) throw ParamError("kappa must be positive");
    if (!(theta > 0.0)) throw ParamError("theta must be positive");
    if (!(v0 > 0.0)) throw ParamError("v0 must be positive");
    if (vol_of_vol < 0.0) throw ParamError("vol-of-vol must be non-negative");
    if (mean_reversion < 0.0) throw ParamError("mean reversion must be non-negative");
    if (std::fabs(rho_spot_var) > 1.0) throw ParamError("rho_spot_var outside [-1, 1]");
    for (const double rho : rho_front_second.values()) {
        if (std::fabs(rho) > 1.0) throw ParamError("rho(t) outside [-1, 1]");
        if (!correlation_psd(rho, rho_spot_var))
            throw ParamError("correlation matrix not PSD: rho=" + std::to_string(rho) +
                             ", rho_v=" + std::to_string(rho_spot_var) +
                             " (|rho_v| limit " + std::to_string(max_abs_rho_spot_var(rho)) +
                             ")");
    }
    for (const double rho : rho_spaced)
        if (std::fabs(rho) > 1.0) throw ParamError("spaced correlation outside [-1, 1]");
}

void SimConfig::validate() const {
    if (particles < 1000) throw ConfigError("SimConfig: need at least 1000 particles");
    if (substeps_per_day < 1) throw ConfigError("SimConfig: substeps_per_day must be >= 1");
    if (mollifier_bandwidth < 0.0)
        throw ConfigError("SimConfig: mollifier bandwidth must be positive or 0 (auto)");
    if (threads < 0) throw ConfigError("SimConfig: threads must be >= 0");
}

}  // namespace cfslv::mc
