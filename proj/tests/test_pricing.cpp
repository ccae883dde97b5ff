#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfslv/errors.hpp"
#include "cfslv/index_pricing.hpp"
#include "cfslv/simulation.hpp"
#include "json.hpp"

using namespace cfslv;
using namespace cfslv::pricing;
using cfslv::Calendar;
using cfslv::market::DiscountCurve;
using cfslv::market::FuturesCurve;

namespace {

FuturesCurve scan_curve() {
    const Date valuation(2019, 12, 16);
    std::vector<Date> mats;
    std::vector<double> px;
    for (int m = 0; m < 18; ++m) {
        mats.emplace_back(2020 + m / 12, static_cast<unsigned>(m % 12 + 1), 20);
        px.push_back(60.0);
    }
    return FuturesCurve(valuation, std::move(mats), std::move(px));
}

}  // namespace

TEST_CASE("vanilla pricing from terminal samples") {
    SUBCASE("two-path hand average") {
        const auto priced = price_vanilla_from_samples({90.0, 110.0}, 100.0, 1.0, 100.0, 1.0,
                                                       OptionType::Call);
        CHECK(priced.price == doctest::Approx(5.0));
    }
    SUBCASE("constant paths at the strike price zero") {
        const auto priced = price_vanilla_from_samples({100.0, 100.0, 100.0}, 100.0, 1.0, 100.0,
                                                       0.98, OptionType::Call);
        CHECK(priced.price == 0.0);
        CHECK(priced.std_error == 0.0);
    }
    SUBCASE("zero strike call is the discounted forward estimate") {
        std::vector<double> samples;
        const CounterRng rng(3);
        for (std::size_t i = 0; i < 50000; ++i)
            samples.push_back(100.0 * std::exp(0.2 * rng.normal_pair(i, 0, 0)[0] - 0.02));
        const auto priced =
            price_vanilla_from_samples(samples, 100.0, 1.0, 1e-9, 0.97, OptionType::Call);
        double mean = 0.0;
        for (const double s : samples) mean += s;
        mean /= static_cast<double>(samples.size());
        CHECK(priced.price == doctest::Approx(0.97 * mean).epsilon(1e-9));
        CHECK(std::fabs(priced.price - 0.97 * 100.0) < 3.0 * priced.std_error + 0.97 * 1e-9);
    }
    SUBCASE("puts via parity direction") {
        const auto call = price_vanilla_from_samples({90.0, 110.0}, 100.0, 1.0, 95.0, 1.0,
                                                     OptionType::Call);
        const auto put = price_vanilla_from_samples({90.0, 110.0}, 100.0, 1.0, 95.0, 1.0,
                                                    OptionType::Put);
        CHECK(call.price - put.price == doctest::Approx(0.5 * (90.0 + 110.0) - 95.0));
    }
}

TEST_CASE("index vanilla pricing off stored paths") {
    gsci::IndexPaths paths;
    paths.dates = {Date(2020, 1, 2), Date(2020, 7, 2)};
    paths.times = {0.0, 0.5};
    paths.values = {{100.0, 100.0}, {90.0, 110.0}};
    const DiscountCurve discount = DiscountCurve::flat(0.0);

    std::vector<OptionSpec> specs;
    specs.push_back({OptionType::Call, 0.5, 1.0, true});   // ATM by moneyness
    specs.push_back({OptionType::Call, 0.5, 95.0, false});  // absolute strike
    const auto priced = price_index_vanillas(paths, specs, discount, 100.0);
    CHECK(priced[0].price == doctest::Approx(5.0));
    CHECK(priced[1].price == doctest::Approx(7.5));

    SUBCASE("expiry off the grid raises RangeError") {
        specs[0].expiry = 0.7;
        CHECK_THROWS_AS(price_index_vanillas(paths, specs, discount, 100.0), RangeError);
    }
}

TEST_CASE("month arithmetic lands on business days") {
    const Calendar calendar;
    CHECK(add_months_business(Date(2019, 12, 16), 1, calendar) == Date(2020, 1, 16));
    // 2020-03-16 is a Monday; 2020-02-16 is a Sunday -> rolls forward
    CHECK(add_months_business(Date(2019, 12, 16), 2, calendar) == Date(2020, 2, 17));
    CHECK(add_months_business(Date(2020, 1, 31), 1, calendar) == Date(2020, 3, 2));  // Feb 29 Sat
}

TEST_CASE("sensitivity scan structure and projection") {
    const auto curve = scan_curve();
    const Calendar calendar;
    const auto schedule = market::build_roll_schedule(calendar, curve, curve.valuation_date(),
                                                      Date(2020, 7, 31));
    const DiscountCurve discount = DiscountCurve::flat(0.015);
    mc::ModelParams base;  // Table-1 style defaults
    mc::SimConfig sim;
    sim.particles = 2000;
    sim.seed = 11;

    SensitivityConfig cfg;
    cfg.maturity_months = {1, 2, 3, 4, 5, 6};
    cfg.smile_month = 6;
    const EtaProvider provider = [](double a) { return lv::LocalVolSurface::flat(0.25, a); };

    SUBCASE("grids identical across scanned values") {
        const auto report = sensitivity_scan(base, provider, curve, schedule, discount, calendar,
                                             "rho", {-1.0, 1.0}, sim, cfg);
        REQUIRE(report.curves.size() == 2);
        for (const auto& c : report.curves) {
            CHECK(c.atm_vols.size() == cfg.maturity_months.size());
            CHECK(c.smile_vols.size() == cfg.moneyness.size());
        }
        CHECK(report.param == "rho");
    }
    SUBCASE("rho_v values outside the PSD wedge are projected onto the boundary") {
        base.rho_front_second = mc::PiecewiseCorrelation(0.9);
        const auto report = sensitivity_scan(base, provider, curve, schedule, discount, calendar,
                                             "rho_v", {-1.0, 1.0}, sim, cfg);
        const double limit = mc::max_abs_rho_spot_var(0.9);
        CHECK(report.curves[0].value_requested == -1.0);
        CHECK(report.curves[0].value_used == doctest::Approx(-limit));
        CHECK(report.curves[1].value_used == doctest::Approx(limit));
    }
    SUBCASE("unknown parameter raises ConfigError before simulating") {
        CHECK_THROWS_AS(sensitivity_scan(base, provider, curve, schedule, discount, calendar,
                                         "sigma", {1.0}, sim, cfg),
                        ConfigError);
        CHECK_THROWS_AS(sensitivity_scan(base, provider, curve, schedule, discount, calendar,
                                         "rho", {}, sim, cfg),
                        ConfigError);
    }
    SUBCASE("JSON and dat serialization") {
        const auto report = sensitivity_scan(base, provider, curve, schedule, discount, calendar,
                                             "kappa", {0.5, 2.0}, sim, cfg);
        const auto parsed = nlohmann::json::parse(report.to_json());
        CHECK(parsed.at("param") == "kappa");
        CHECK(parsed.at("curves").size() == 2);

        const auto dir = (std::filesystem::temp_directory_path() / "scan_out").string();
        const auto files = report.save_dat_files(dir);
        REQUIRE(files.size() == 4);  // atm + smile per value
        std::ifstream in(files[0]);
        std::string header;
        std::getline(in, header);
        CHECK(header == "t y");
        int rows = 0;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == static_cast<int>(cfg.maturity_months.size()));
    }
}
