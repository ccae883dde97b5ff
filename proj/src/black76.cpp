#include "cfslv/black76.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfslv/errors.hpp"

namespace cfslv::pricing {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double intrinsic_forward(double forward, double strike, OptionType type) {
    const double sign = type == OptionType::Call ? 1.0 : -1.0;
    return std::max(sign * (forward - strike), 0.0);
}
}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double black_price(double forward, double strike, double expiry, double sigma, double df,
                   OptionType type) {
    if (forward <= 0.0 || strike <= 0.0)
        throw DomainError("black_price: forward and strike must be positive");
    if (expiry < 0.0) throw DomainError("black_price: negative expiry");
    const double stddev = sigma * std::sqrt(expiry);
    if (stddev <= 0.0) return df * intrinsic_forward(forward, strike, type);
    const double d1 = std::log(forward / strike) / stddev + 0.5 * stddev;
    const double d2 = d1 - stddev;
    if (type == OptionType::Call)
        return df * (forward * norm_cdf(d1) - strike * norm_cdf(d2));
    return df * (strike * norm_cdf(-d2) - forward * norm_cdf(-d1));
}

double black_vega(double forward, double strike, double expiry, double sigma, double df) {
    const double stddev = sigma * std::sqrt(expiry);
    if (stddev <= 0.0) return 0.0;
    const double d1 = std::log(forward / strike) / stddev + 0.5 * stddev;
    return df * forward * std::sqrt(expiry) * kInvSqrt2Pi * std::exp(-0.5 * d1 * d1);
}

double implied_vol(double price, double forward, double strike, double expiry, double df,
                   OptionType type) {
    if (expiry <= 0.0) throw DomainError("implied_vol: expiry must be positive");
    if (df <= 0.0) throw DomainError("implied_vol: discount factor must be positive");
    const double lower = df * intrinsic_forward(forward, strike, type);
    const double upper = type == OptionType::Call ? df * forward : df * strike;
    const double tol = 1e-10 * df * forward;
    if (price < lower - tol || price > upper + tol)
        throw DomainError("implied_vol: price " + std::to_string(price) +
                          " outside no-arbitrage bounds [" + std::to_string(lower) + ", " +
                          std::to_string(upper) + "]");
    if (price <= lower + tol) return 0.0;

    double lo = 0.0;
    double hi = 1.0;
    while (black_price(forward, strike, expiry, hi, df, type) < price && hi < 20.0) hi *= 2.0;

    double sigma = std::clamp(std::sqrt(2.0 * std::fabs(std::log(forward / strike)) / expiry),
                              1e-4, hi);
    for (int it = 0; it < 100; ++it) {
        const double diff = black_price(forward, strike, expiry, sigma, df, type) - price;
        if (std::fabs(diff) < tol) return sigma;
        if (diff > 0.0)
            hi = sigma;
        else
            lo = sigma;
        const double vega = black_vega(forward, strike, expiry, sigma, df);
        double next = vega > 1e-14 ? sigma - diff / vega : 0.5 * (lo + hi);
        if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
        if (std::fabs(next - sigma) < 1e-16) return next;
        sigma = next;
    }
    return sigma;
}

}  // namespace cfslv::pricing
