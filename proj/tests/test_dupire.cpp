#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cfslv/black76.hpp"
#include "cfslv/dupire.hpp"
#include "cfslv/errors.hpp"
#include "cfslv/lv_calibration.hpp"

using namespace cfslv;
using namespace cfslv::lv;
using cfslv::market::DiscountCurve;
using cfslv::market::FuturesCurve;
using cfslv::market::QuoteKind;
using cfslv::market::QuoteSet;
using cfslv::market::QuoteUnit;
using cfslv::market::VanillaQuote;

namespace {

FuturesCurve flat_curve(double level, int n = 16) {
    const Date valuation(2019, 12, 16);
    std::vector<Date> mats;
    std::vector<double> px;
    for (int m = 0; m < n; ++m) {
        mats.emplace_back(2020 + m / 12, static_cast<unsigned>(m % 12 + 1), 20);
        px.push_back(level);
    }
    return FuturesCurve(valuation, std::move(mats), std::move(px));
}

QuoteSet model_quotes(const FuturesCurve& curve, const DiscountCurve& discount,
                      const LocalVolSurface& eta, const std::vector<double>& expiries,
                      const std::vector<std::size_t>& contracts,
                      const std::vector<double>& moneyness) {
    QuoteSet quotes;
    for (std::size_t e = 0; e < expiries.size(); ++e)
        for (const double m : moneyness) {
            VanillaQuote q;
            q.kind = QuoteKind::OnFutures;
            q.expiry = expiries[e];
            q.underlying = curve.maturities()[contracts[e]];
            q.strike_or_moneyness = m * curve.price(contracts[e]);
            q.unit = QuoteUnit::Price;
            q.value = 1.0;
            q.quote_date = curve.valuation_date();
            quotes.quotes.push_back(q);
        }
    PdeGridSpec grid;
    grid.k_max = 3.0;
    grid.k_cells = 400;
    grid.steps_per_year = 400;
    const auto prices = reprice_futures_quotes(quotes, curve, discount, eta, grid);
    for (std::size_t i = 0; i < prices.size(); ++i) quotes.quotes[i].value = prices[i];
    return quotes;
}

}  // namespace

TEST_CASE("effective strike examples and inverse pair") {
    SUBCASE("ATM fixed point") {
        CHECK(effective_strike(0.2, 1.0, 57.0, 57.0, 0.4) == doctest::Approx(1.0));
    }
    SUBCASE("no mean reversion collapses to moneyness") {
        CHECK(effective_strike(0.0, 1.0, 45.0, 60.0, 0.0) == doctest::Approx(45.0 / 60.0));
    }
    SUBCASE("a=0.3, T-t=1, K/F=0.9") {
        CHECK(effective_strike(0.0, 1.0, 0.9, 1.0, 0.3) ==
              doctest::Approx(0.865014).epsilon(1e-6));
    }
    SUBCASE("round trip with s = k reproduces K to 1e-12") {
        for (const double a : {0.0, 0.3, 1.1})
            for (const double K : {30.0, 55.0, 80.0})
                for (const double t : {0.0, 0.4}) {
                    const double k = effective_strike(t, 1.3, K, 60.0, a);
                    CHECK(futures_from_spot(k, t, 1.3, 60.0, a) ==
                          doctest::Approx(K).epsilon(1e-12));
                }
    }
}

TEST_CASE("futures from spot examples") {
    CHECK(futures_from_spot(1.0, 0.3, 2.0, 48.0, 0.7) == doctest::Approx(48.0));
    CHECK(futures_from_spot(0.8, 0.0, 1.0, 48.0, 0.0) == doctest::Approx(48.0 * 0.8));
    CHECK(futures_from_spot(0.9, 0.0, 1.0, 1.0, 0.3) ==
          doctest::Approx(0.925918).epsilon(1e-6));
}

TEST_CASE("futures local vol map") {
    SUBCASE("a=0 collapses to K eta(t, K/F)") {
        const auto eta = LocalVolSurface::flat(0.4, 0.0);
        CHECK(local_vol_futures(eta, 0.0, 1.0, 52.0, 60.0) == doctest::Approx(52.0 * 0.4));
    }
    SUBCASE("ATM is damped by e^{-a(T-t)}") {
        const auto eta = LocalVolSurface::flat(0.4, 0.3);
        CHECK(local_vol_futures(eta, 0.25, 1.0, 60.0, 60.0) ==
              doctest::Approx(60.0 * std::exp(-0.3 * 0.75) * 0.4));
    }
    SUBCASE("strike at the model floor gives zero") {
        const auto eta = LocalVolSurface::flat(0.4, 0.3);
        const double floor = 60.0 * (1.0 - std::exp(-0.3));
        CHECK(local_vol_futures(eta, 0.0, 1.0, floor, 60.0) == doctest::Approx(0.0));
        CHECK_THROWS_AS(local_vol_futures(eta, 0.0, 1.0, floor - 1.0, 60.0), DomainError);
    }
}

TEST_CASE("local vol surface interpolation rule") {
    const LocalVolSurface eta(0.0, {0.5, 1.0}, {0.8, 1.0, 1.2},
                              {{0.2, 0.3, 0.4}, {0.5, 0.6, 0.7}});
    // piecewise constant, left-continuous in time
    CHECK(eta.value(0.2, 1.0) == 0.3);
    CHECK(eta.value(0.5, 1.0) == 0.3);
    CHECK(eta.value(0.51, 1.0) == 0.6);
    CHECK(eta.value(2.0, 1.0) == 0.6);  // flat beyond the last knot
    // linear in strike, flat extrapolation
    CHECK(eta.value(0.2, 0.9) == doctest::Approx(0.25));
    CHECK(eta.value(0.2, 0.5) == 0.2);
    CHECK(eta.value(0.2, 2.0) == 0.4);
}

TEST_CASE("local vol surface JSON round trip is bit exact") {
    const LocalVolSurface eta(0.267419, {0.25, 0.5}, {0.7, 1.0, 1.3},
                              {{0.21234567890123456, 0.3, 0.19},
                               {0. + 1.0 / 3.0, 0.25000000000000011, 0.26}});
    const auto loaded = LocalVolSurface::from_json(eta.to_json());
    CHECK(loaded.mean_reversion() == eta.mean_reversion());
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(loaded.values()[i][j] == eta.values()[i][j]);  // exact, not approx
    CHECK(loaded.time_knots() == eta.time_knots());
    CHECK(loaded.strike_knots() == eta.strike_knots());
}

TEST_CASE("degenerate PDE keeps the payoff") {
    // eta -> 0 and a = 0: d_t c = 0. The surface requires positive values, so
    // use a vanishingly small vol and compare layers to the initial one.
    const auto eta = LocalVolSurface::flat(1e-6, 0.0);
    PdeGridSpec grid;
    grid.k_max = 3.0;
    grid.k_cells = 200;
    grid.steps_per_year = 100;
    const auto sol = solve_normalized_calls(eta, 0.0, grid);
    const auto& first = sol.layer(0);
    const auto& last = sol.layer(sol.times().size() - 1);
    for (std::size_t i = 0; i < first.size(); ++i)
        CHECK(last[i] == doctest::Approx(first[i]).epsilon(1e-8));
    // and the initial layer is the (cell-averaged) payoff
    const double h = sol.strikes()[1] - sol.strikes()[0];
    for (std::size_t i = 0; i < first.size(); ++i)
        CHECK(std::fabs(first[i] - std::max(1.0 - sol.strikes()[i], 0.0)) <= 0.5 * h);
}

TEST_CASE("PDE matches the Black closed form at a=0, flat vol") {
    const auto eta = LocalVolSurface::flat(0.3, 0.0);
    PdeGridSpec grid;
    grid.k_max = 3.0;
    grid.k_cells = 400;
    grid.steps_per_year = 400;
    const auto sol = solve_normalized_calls(eta, 0.0, grid);
    for (const double k : {0.8, 1.0, 1.2}) {
        const double ref = pricing::black_price(1.0, k, 1.0, 0.3, 1.0, pricing::OptionType::Call);
        CHECK(std::fabs(sol.value(1.0, k) - ref) < 1e-4);
    }
    // frozen oracle value: ATM normalized call = 2 Phi(0.15) - 1
    CHECK(sol.value(1.0, 1.0) == doctest::Approx(0.1192354).epsilon(2e-4));
}

TEST_CASE("pure transport solves by characteristics") {
    // a = 0.5, eta ~ 0: s_t stays at 1, so c(t,k) = (1-k)^+ for all t.
    const auto eta = LocalVolSurface::flat(1e-3, 0.5);
    PdeGridSpec grid;
    grid.k_max = 3.0;
    grid.k_cells = 600;
    grid.steps_per_year = 600;
    const auto sol = solve_normalized_calls(eta, 0.5, grid);
    double worst = 0.0, worst_far = 0.0;
    for (double k = 0.0; k < 3.0; k += 0.01) {
        const double err = std::fabs(sol.value(1.0, k) - std::max(1.0 - k, 0.0));
        worst = std::max(worst, err);
        if (std::fabs(k - 1.0) > 0.15) worst_far = std::max(worst_far, err);
    }
    CHECK(worst < 2e-3);      // upwinding smears the kink at first order
    CHECK(worst_far < 1e-6);  // exact away from it
}

TEST_CASE("PDE solution shape invariants") {
    const auto eta = LocalVolSurface::flat(0.35, 0.4);
    PdeGridSpec grid;
    grid.k_max = 4.0;
    grid.k_cells = 320;
    grid.steps_per_year = 250;
    grid.horizon = 1.5;
    const auto sol = solve_normalized_calls(eta, 0.4, grid);
    for (std::size_t li = 0; li < sol.times().size(); ++li) {
        const auto& layer = sol.layer(li);
        CHECK(layer[0] == 1.0);  // martingale boundary: c(t,0) = E[s_t] = 1
        for (std::size_t i = 1; i < layer.size(); ++i) {
            CHECK(layer[i] <= layer[i - 1] + 1e-8);  // monotone non-increasing
            CHECK(layer[i] >= 0.0);
            CHECK(layer[i] <= layer[0]);
        }
        for (std::size_t i = 1; i + 1 < layer.size(); ++i)
            CHECK(layer[i + 1] - 2.0 * layer[i] + layer[i - 1] >= -1e-8);  // convex
    }
}

TEST_CASE("grid refinement converges at second order") {
    double values[3];
    int idx = 0;
    for (const std::size_t cells : {100, 200, 400}) {
        const auto eta = LocalVolSurface::flat(0.25, 0.3);
        PdeGridSpec grid;
        grid.k_max = 3.0;
        grid.k_cells = cells;
        grid.steps_per_year = static_cast<double>(cells);
        const auto sol = solve_normalized_calls(eta, 0.3, grid);
        values[idx++] = sol.value(1.0, 0.95);
    }
    const double coarse_change = std::fabs(values[1] - values[0]);
    const double fine_change = std::fabs(values[2] - values[1]);
    CHECK(fine_change < coarse_change / 3.0);  // ~4 expected at order 2
}

TEST_CASE("bad grids are rejected") {
    const auto eta = LocalVolSurface::flat(0.3, 0.0);
    PdeGridSpec grid;
    grid.k_min = 2.0;
    grid.k_max = 1.0;
    CHECK_THROWS_AS(solve_normalized_calls(eta, 0.0, grid), ConfigError);
    grid.k_min = 0.0;
    grid.k_max = 3.0;
    grid.horizon = -1.0;
    CHECK_THROWS_AS(solve_normalized_calls(eta, 0.0, grid), ConfigError);
}

TEST_CASE("vanilla pricing off the grid") {
    const DiscountCurve discount = DiscountCurve::flat(0.015);

    SUBCASE("deep ITM reaches the linear regime of c") {
        const double a = 0.3;
        const auto eta = LocalVolSurface::flat(0.25, a);
        PdeGridSpec grid;
        grid.k_max = 3.0;
        grid.k_cells = 300;
        grid.steps_per_year = 250;
        const auto sol = solve_normalized_calls(eta, a, grid);
        const double f0 = 60.0, K = 1.0, t = 1.0, T = 1.1;
        const double k_eff = effective_strike(t, T, K, f0, a);
        const double price = vanilla_price_on_futures(sol, t, T, K, f0, discount);
        const double linear = discount.discount(t) * f0 * std::exp(-a * (T - t)) * (1.0 - k_eff);
        CHECK(price == doctest::Approx(linear).epsilon(1e-6));
        // disabling extrapolation raises for strikes below the model floor
        if (k_eff < 0.0)
            CHECK_THROWS_AS(vanilla_price_on_futures(sol, t, T, K, f0, discount, false),
                            RangeError);
    }
    SUBCASE("deterministic futures price is discounted intrinsic") {
        const auto eta = LocalVolSurface::flat(1e-6, 0.0);
        PdeGridSpec grid;
        grid.k_max = 3.0;
        grid.k_cells = 300;
        grid.steps_per_year = 250;
        const auto sol = solve_normalized_calls(eta, 0.0, grid);
        const double df = discount.discount(0.75);
        CHECK(vanilla_price_on_futures(sol, 0.75, 1.0, 50.0, 60.0, discount) ==
              doctest::Approx(df * 10.0).epsilon(1e-4));
        CHECK(vanilla_price_on_futures(sol, 0.75, 1.0, 70.0, 60.0, discount) ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    }
    SUBCASE("ATM matches Black-76") {
        const auto eta = LocalVolSurface::flat(0.3, 0.0);
        PdeGridSpec grid;
        grid.k_max = 3.0;
        grid.k_cells = 400;
        grid.steps_per_year = 400;
        const auto sol = solve_normalized_calls(eta, 0.0, grid);
        const double df = discount.discount(1.0);
        const double ref = pricing::black_price(60.0, 60.0, 1.0, 0.3, df,
                                                pricing::OptionType::Call);
        CHECK(vanilla_price_on_futures(sol, 1.0, 1.0, 60.0, 60.0, discount) ==
              doctest::Approx(ref).epsilon(1e-4));
    }
    SUBCASE("price is monotone non-increasing in strike") {
        const auto eta = LocalVolSurface::flat(0.3, 0.2);
        PdeGridSpec grid;
        grid.k_max = 3.0;
        grid.k_cells = 300;
        grid.steps_per_year = 250;
        const auto sol = solve_normalized_calls(eta, 0.2, grid);
        double prev = 1e30;
        for (double K = 30.0; K <= 90.0; K += 2.5) {
            const double p = vanilla_price_on_futures(sol, 1.0, 1.1, K, 60.0, discount);
            CHECK(p <= prev + 1e-12);
            CHECK(p >= 0.0);
            prev = p;
        }
    }
}

TEST_CASE("LV calibration round trips a flat surface") {
    const auto curve = flat_curve(60.0);
    const DiscountCurve discount = DiscountCurve::flat(0.015);
    const double a = 0.3;
    const auto quotes = model_quotes(curve, discount, LocalVolSurface::flat(0.25, a),
                                     {0.5, 1.0}, {6, 12}, {0.85, 0.95, 1.0, 1.05, 1.15});

    LvCalibrationConfig config;
    config.grid.k_max = 3.0;
    config.grid.k_cells = 250;
    config.grid.steps_per_year = 200;
    config.budget_per_slab = 2500;
    const std::uint64_t solves_before = pde_solve_count();
    const auto result = calibrate_local_vol(quotes, curve, discount, a, config);

    SUBCASE("recovered knots are within 5e-3 of the generator") {
        for (const auto& row : result.surface.values())
            for (const double v : row) CHECK(v == doctest::Approx(0.25).epsilon(0.02));
        for (const auto& row : result.surface.values())
            for (const double v : row) CHECK(std::fabs(v - 0.25) < 5e-3);
    }
    SUBCASE("every optimizer iteration performed exactly one PDE solve") {
        CHECK(result.n_pde_solves == result.n_objective_evals);
        CHECK(pde_solve_count() - solves_before >= result.n_pde_solves);
    }
}

TEST_CASE("LV calibration fits exact Black quotes at a single expiry") {
    // a = 0 and flat eta: the model is exactly Black, so the residual must
    // collapse to optimizer precision.
    const auto curve = flat_curve(1.0);
    const DiscountCurve discount = DiscountCurve::flat(0.0);
    QuoteSet quotes;
    for (const double m : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        VanillaQuote q;
        q.kind = QuoteKind::OnFutures;
        q.expiry = 0.5;
        q.underlying = curve.maturities()[6];
        q.strike_or_moneyness = m;
        q.unit = QuoteUnit::Price;
        q.value = pricing::black_price(1.0, m, 0.5, 0.3, 1.0, pricing::OptionType::Call);
        q.quote_date = curve.valuation_date();
        quotes.quotes.push_back(q);
    }
    LvCalibrationConfig config;
    config.grid.k_max = 3.0;
    config.grid.k_cells = 400;
    config.grid.steps_per_year = 400;
    config.budget_per_slab = 4000;
    config.smoothness_lambda = 1e-5;
    const auto result = calibrate_local_vol(quotes, curve, discount, 0.0, config);
    for (const double r : result.residuals) CHECK(std::fabs(r) < 1e-5);
}

TEST_CASE("LV calibration rejects an empty quote set") {
    const auto curve = flat_curve(60.0);
    const DiscountCurve discount = DiscountCurve::flat(0.015);
    QuoteSet empty;
    CHECK_THROWS_AS(calibrate_local_vol(empty, curve, discount, 0.3, {}), CalibrationError);
}

TEST_CASE("quotes below the model floor are excluded with a warning") {
    const auto curve = flat_curve(60.0);
    const DiscountCurve discount = DiscountCurve::flat(0.015);
    const double a = 0.5;
    auto quotes = model_quotes(curve, discount, LocalVolSurface::flat(0.25, a), {1.0}, {12},
                               {0.9, 1.0, 1.1});
    // strike far below the floor F0 (1 - e^{-a(T-t)})
    VanillaQuote dead;
    dead.kind = QuoteKind::OnFutures;
    dead.expiry = 1.0;
    dead.underlying = curve.maturities()[12];
    dead.strike_or_moneyness = 1.0;  // deep below the floor for a=0.5
    dead.unit = QuoteUnit::Price;
    dead.value = 0.94 * 59.0;
    dead.quote_date = curve.valuation_date();
    quotes.quotes.push_back(dead);

    LvCalibrationConfig config;
    config.grid.k_cells = 200;
    config.grid.steps_per_year = 150;
    config.budget_per_slab = 1500;
    const auto result = calibrate_local_vol(quotes, curve, discount, a, config);
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.residuals.size() == 3);
}
