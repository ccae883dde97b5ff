#include "cfslv/lv_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfslv/black76.hpp"
#include "cfslv/subplex.hpp"

namespace cfslv::lv {

namespace {

struct FittedQuote {
    double expiry = 0.0;
    double maturity = 0.0;   // underlying contract maturity (year fraction)
    double f0 = 0.0;
    double strike = 0.0;
    double k_eff = 0.0;
    double market_price = 0.0;
    std::size_t slab = 0;    // index into the expiry grid
};

double second_difference_penalty(const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const double d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
        acc += d2 * d2;
    }
    return acc;
}

}  // namespace

std::vector<double> reprice_futures_quotes(const market::QuoteSet& quotes,
                                           const market::FuturesCurve& curve,
                                           const market::DiscountCurve& discount,
                                           const LocalVolSurface& eta,
                                           const PdeGridSpec& grid_template) {
    PdeGridSpec grid = grid_template;
    double horizon = 0.0;
    for (const auto& q : quotes.quotes) {
        if (q.kind != market::QuoteKind::OnFutures) continue;
        horizon = std::max(horizon, q.expiry);
        grid.mandatory_times.push_back(q.expiry);
    }
    if (horizon <= 0.0) throw DataError("reprice_futures_quotes: no futures quotes");
    grid.horizon = horizon;
    const auto solution = solve_normalized_calls(eta, eta.mean_reversion(), grid);

    std::vector<double> prices;
    for (const auto& q : quotes.quotes) {
        if (q.kind != market::QuoteKind::OnFutures) continue;
        const double f0 = curve.price_at(*q.underlying);
        const double maturity = year_fraction(curve.valuation_date(), *q.underlying);
        prices.push_back(vanilla_price_on_futures(solution, q.expiry, maturity,
                                                  q.strike_or_moneyness, f0, discount));
    }
    return prices;
}

LvCalibrationResult calibrate_local_vol(const market::QuoteSet& quotes,
                                        const market::FuturesCurve& curve,
                                        const market::DiscountCurve& discount,
                                        double mean_reversion,
                                        const LvCalibrationConfig& config) {
    if (mean_reversion < 0.0) throw ParamError("calibrate_local_vol: mean reversion < 0");
    const double a = mean_reversion;

    LvCalibrationResult result{LocalVolSurface::flat(0.2, a), {}, 0.0, 0, 0, {}};

    // Collect futures quotes as prices in effective-strike coordinates.
    std::vector<FittedQuote> fitted;
    double sum_vol = 0.0;
    std::size_t n_vol = 0;
    for (const auto& q : quotes.quotes) {
        if (q.kind != market::QuoteKind::OnFutures) continue;
        FittedQuote fq;
        fq.expiry = q.expiry;
        fq.maturity = year_fraction(curve.valuation_date(), *q.underlying);
        fq.f0 = curve.price_at(*q.underlying);
        fq.strike = q.strike_or_moneyness;
        fq.k_eff = effective_strike(q.expiry, fq.maturity, fq.strike, fq.f0, a);
        const double df = discount.discount(q.expiry);
        if (q.unit == market::QuoteUnit::ImpliedVol) {
            fq.market_price = pricing::black_price(fq.f0, fq.strike, q.expiry, q.value, df,
                                                   pricing::OptionType::Call);
            sum_vol += q.value;
            ++n_vol;
        } else {
            fq.market_price = q.value;
            try {
                sum_vol += pricing::implied_vol(q.value, fq.f0, fq.strike, q.expiry, df,
                                                pricing::OptionType::Call);
                ++n_vol;
            } catch (const DomainError&) {
                // price outside Black bounds; skip for the initial guess only
            }
        }
        if (fq.k_eff <= config.grid.k_min + 1e-12) {
            result.warnings.push_back("quote (t=" + std::to_string(fq.expiry) + ", K=" +
                                      std::to_string(fq.strike) +
                                      ") below the model floor; excluded from fit");
            continue;
        }
        fitted.push_back(fq);
    }
    if (fitted.empty())
        throw CalibrationError("calibrate_local_vol: no usable futures quotes");

    // Expiry grid (one time knot per quoted expiry).
    std::vector<double> expiries;
    for (const auto& fq : fitted) expiries.push_back(fq.expiry);
    std::sort(expiries.begin(), expiries.end());
    expiries.erase(std::unique(expiries.begin(), expiries.end(),
                               [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
                   expiries.end());
    for (auto& fq : fitted)
        fq.slab = std::lower_bound(expiries.begin(), expiries.end(), fq.expiry - 1e-12) -
                  expiries.begin();

    // Common strike-knot lattice from the pooled effective strikes.
    std::vector<double> pooled;
    for (const auto& fq : fitted) pooled.push_back(fq.k_eff);
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end(),
                             [](double x, double y) { return std::fabs(x - y) < 1e-9; }),
                 pooled.end());
    const std::size_t nk = std::min<std::size_t>(std::clamp<std::size_t>(config.strike_knots,
                                                                          1, 9),
                                                 pooled.size());
    std::vector<double> strike_knots(nk);
    if (nk == 1) {
        strike_knots[0] = pooled[pooled.size() / 2];
    } else {
        const double klo = pooled.front();
        const double khi = pooled.back();
        for (std::size_t i = 0; i < nk; ++i)
            strike_knots[i] = klo + (khi - klo) * static_cast<double>(i) /
                                        static_cast<double>(nk - 1);
    }

    // Initial flat guess: mean implied vol adjusted for the mean-reversion
    // damping of the futures vol.
    double eta0 = n_vol > 0 ? sum_vol / static_cast<double>(n_vol) : 0.2;
    {
        const double t_mid = expiries[expiries.size() / 2];
        if (a > 1e-12) {
            const double damp = std::sqrt((1.0 - std::exp(-2.0 * a * t_mid)) / (2.0 * a * t_mid));
            eta0 /= damp;
        }
        eta0 = std::clamp(eta0, 0.05, 2.0);
    }

    std::vector<std::vector<double>> values(expiries.size(),
                                            std::vector<double>(nk, eta0));

    const auto build_surface = [&](const std::vector<std::vector<double>>& vals) {
        std::vector<std::vector<double>> clamped = vals;
        for (auto& row : clamped)
            for (double& v : row) v = std::clamp(v, config.eta_min, config.eta_cap);
        return LocalVolSurface(a, expiries, strike_knots, clamped, config.eta_cap);
    };

    // Bootstrap expiry slabs front to back. Each objective evaluation solves
    // the PDE once up to the slab expiry and reprices that slab's quotes.
    const std::uint64_t solves_before = pde_solve_count();
    std::vector<double> best_model_prices(fitted.size(), 0.0);
    for (std::size_t slab = 0; slab < expiries.size(); ++slab) {
        std::vector<std::size_t> slab_quotes;
        for (std::size_t qi = 0; qi < fitted.size(); ++qi)
            if (fitted[qi].slab == slab) slab_quotes.push_back(qi);

        PdeGridSpec grid = config.grid;
        grid.horizon = expiries[slab];
        grid.mandatory_times.assign(expiries.begin(), expiries.begin() + slab + 1);

        double best_loss = std::numeric_limits<double>::infinity();
        std::vector<double> best_x;
        std::vector<double> best_prices(slab_quotes.size(), 0.0);

        const calib::Objective objective = [&](const std::vector<double>& x) {
            auto vals = values;
            double clamp_penalty = 0.0;
            for (std::size_t i = 0; i < nk; ++i) {
                vals[slab][i] = x[i];
                const double over = std::max({0.0, config.eta_min - x[i],
                                              x[i] - config.eta_cap});
                clamp_penalty += 10.0 * over * over;
            }
            const auto surface = build_surface(vals);
            const auto solution = solve_normalized_calls(surface, a, grid);
            ++result.n_objective_evals;

            double loss = clamp_penalty;
            std::vector<double> prices(slab_quotes.size());
            for (std::size_t j = 0; j < slab_quotes.size(); ++j) {
                const auto& fq = fitted[slab_quotes[j]];
                const double model = vanilla_price_on_futures(solution, fq.expiry, fq.maturity,
                                                              fq.strike, fq.f0, discount);
                prices[j] = model;
                const double rel = (model - fq.market_price) / fq.f0;
                loss += rel * rel;
            }
            loss += config.smoothness_lambda * second_difference_penalty(vals[slab]);
            if (slab > 0) {
                // temporal smoothness against the already-fitted previous row
                for (std::size_t i = 0; i < nk; ++i) {
                    const double dt_diff = vals[slab][i] - vals[slab - 1][i];
                    loss += config.smoothness_lambda * dt_diff * dt_diff;
                }
            }
            if (loss < best_loss) {
                best_loss = loss;
                best_x = x;
                best_prices = prices;
            }
            return loss;
        };

        calib::SubplexConfig sub;
        sub.scale = {0.05};
        sub.budget = config.budget_per_slab;
        sub.nsmax = std::min<std::size_t>(5, std::max<std::size_t>(nk, 1));
        sub.nsmin = std::min<std::size_t>(2, sub.nsmax);
        const auto opt = calib::subplex_minimize(objective, values[slab], sub);
        (void)opt;

        for (std::size_t i = 0; i < nk; ++i)
            values[slab][i] = std::clamp(best_x[i], config.eta_min, config.eta_cap);
        for (std::size_t j = 0; j < slab_quotes.size(); ++j)
            best_model_prices[slab_quotes[j]] = best_prices[j];
    }
    result.n_pde_solves = pde_solve_count() - solves_before;

    result.surface = build_surface(values);
    result.residuals.resize(fitted.size());
    for (std::size_t qi = 0; qi < fitted.size(); ++qi) {
        result.residuals[qi] = best_model_prices[qi] - fitted[qi].market_price;
        result.max_rel_residual = std::max(result.max_rel_residual,
                                           std::fabs(result.residuals[qi]) / fitted[qi].f0);
    }

    if (result.max_rel_residual > config.price_tolerance_rel)
        throw LvCalibrationError(
            "calibrate_local_vol: max relative residual " +
                std::to_string(result.max_rel_residual) + " above tolerance " +
                std::to_string(config.price_tolerance_rel),
            result);
    return result;
}

}  // namespace cfslv::lv
