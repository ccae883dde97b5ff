#pragma once

namespace cfslv::pricing {

enum class OptionType { Call, Put };

// Standard normal CDF.
double norm_cdf(double x);

// Black-76: discounted forward price of a vanilla on a forward/futures level F.
// price = df * (F Phi(d1) - K Phi(d2)) for calls; sigma = 0 degenerates to
// discounted intrinsic on the forward.
double black_price(double forward, double strike, double expiry, double sigma, double df,
                   OptionType type);

double black_vega(double forward, double strike, double expiry, double sigma, double df);

// Inverts black_price in sigma. Bracketed Newton with bisection fallback;
// the result satisfies |black_price(sigma) - price| < 1e-10 * df * forward.
// Throws DomainError when price violates the no-arbitrage bounds.
double implied_vol(double price, double forward, double strike, double expiry, double df,
                   OptionType type);

}  // namespace cfslv::pricing
