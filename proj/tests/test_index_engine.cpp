#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cfslv/errors.hpp"
#include "cfslv/index_engine.hpp"
#include "cfslv/roll_schedule.hpp"
#include "cfslv/simulation.hpp"

using namespace cfslv;
using namespace cfslv::gsci;
using cfslv::Calendar;
using cfslv::market::FuturesCurve;
using cfslv::market::RollSchedule;
using cfslv::market::build_roll_schedule;

namespace {

FuturesCurve small_curve() {
    const Date valuation(2019, 12, 31);
    std::vector<Date> mats;
    std::vector<double> px;
    for (int m = 0; m < 8; ++m) {
        mats.emplace_back(2020, static_cast<unsigned>(m + 1), 20);
        px.push_back(50.0 + m);
    }
    return FuturesCurve(valuation, std::move(mats), std::move(px));
}

}  // namespace

TEST_CASE("non-roll step examples") {
    CHECK(index_step_nonroll(137.5, 48.0, 48.0) == 137.5);
    CHECK(index_step_nonroll(100.0, 50.0, 55.0) == doctest::Approx(110.0));
    CHECK_THROWS_AS(index_step_nonroll(100.0, 0.0, 55.0), DataError);

    SUBCASE("chained steps telescope exactly") {
        const std::vector<double> prices{50.0, 51.3, 49.7, 52.25, 51.0};
        double index = 100.0;
        for (std::size_t d = 1; d < prices.size(); ++d)
            index = index_step_nonroll(index, prices[d - 1], prices[d]);
        CHECK(index == doctest::Approx(100.0 * prices.back() / prices.front()).epsilon(1e-15));
    }
}

TEST_CASE("roll step examples") {
    SUBCASE("alpha = 1 reduces to the non-roll step") {
        CHECK(index_step_roll(100.0, 1.0, 50.0, 52.0, 51.0, 53.0) ==
              index_step_nonroll(100.0, 50.0, 51.0));
    }
    SUBCASE("alpha = 0 is a pure second-contract update") {
        CHECK(index_step_roll(100.0, 0.0, 50.0, 52.0, 51.0, 53.0) ==
              index_step_nonroll(100.0, 52.0, 53.0));
    }
    SUBCASE("hand arithmetic at alpha = 0.8") {
        CHECK(index_step_roll(100.0, 0.8, 50.0, 52.0, 51.0, 53.0) ==
              doctest::Approx(100.0 * 51.4 / 50.4).epsilon(1e-12));
    }
    SUBCASE("bad inputs") {
        CHECK_THROWS_AS(index_step_roll(100.0, 1.4, 50.0, 52.0, 51.0, 53.0), DataError);
        CHECK_THROWS_AS(index_step_roll(100.0, 0.5, 50.0, -52.0, 51.0, 53.0), DataError);
    }
}

TEST_CASE("replication over a hand-built five-day roll") {
    const auto curve = small_curve();
    const Calendar calendar;
    // January 2020 business days: window on the 5th..9th (Jan 7..13).
    const auto schedule =
        build_roll_schedule(calendar, curve, Date(2020, 1, 1), Date(2020, 1, 15));

    // Hand-made price paths for the front/second pair of each day, one "calm"
    // particle and one scaled by 1.07.
    const std::vector<double> front{50.00, 50.40, 50.10, 50.50, 51.00,
                                    50.20, 49.80, 50.60, 52.90, 53.10, 52.70};
    const std::vector<double> second{52.00, 52.40, 52.20, 52.30, 52.80,
                                     52.10, 51.70, 52.40, 54.00, 54.30, 53.90};
    REQUIRE(schedule.size() == front.size());

    mc::PathSet paths(0, 2, 252.0);
    for (std::size_t d = 0; d < schedule.size(); ++d) {
        const auto& state = schedule.at(d);
        paths.append_day({state.date, year_fraction(curve.valuation_date(), state.date), state},
                         {front[d], 1.07 * front[d]}, {second[d], 1.07 * second[d]});
    }

    const auto result = replicate_index(paths, schedule, 100.0);
    REQUIRE(result.days() == schedule.size());

    SUBCASE("spreadsheet-style profit-and-loss accounting agrees to 1e-12") {
        double index = 100.0;
        for (std::size_t d = 1; d < schedule.size(); ++d) {
            const double alpha = schedule.at(d - 1).alpha_eod;
            const bool pair_changed = schedule.at(d).front != schedule.at(d - 1).front;
            // quantity bought at day d-1 settlement
            const double basket_prev = pair_changed
                                           ? second[d - 1]
                                           : alpha * front[d - 1] + (1.0 - alpha) * second[d - 1];
            const double basket_now =
                pair_changed ? front[d] : alpha * front[d] + (1.0 - alpha) * second[d];
            const double quantity = index / basket_prev;
            index += quantity * (basket_now - basket_prev);  // self-financing P&L route
            CHECK(result.values[d][0] == doctest::Approx(index).epsilon(1e-12));
        }
    }
    SUBCASE("the scaled particle produces the identical index path") {
        for (std::size_t d = 0; d < schedule.size(); ++d)
            CHECK(result.values[d][1] == doctest::Approx(result.values[d][0]).epsilon(1e-12));
    }
    SUBCASE("alpha multiset across the window") {
        std::vector<double> alphas;
        for (std::size_t d = 0; d < schedule.size(); ++d)
            if (schedule.at(d).alpha_eod < 1.0) alphas.push_back(schedule.at(d).alpha_eod);
        CHECK(alphas == std::vector<double>{0.8, 0.6, 0.4, 0.2, 0.0});
    }
    SUBCASE("positivity") {
        for (const auto& day : result.values)
            for (const double v : day) CHECK(v > 0.0);
    }
}

TEST_CASE("constant futures paths keep the index at its initial value") {
    const auto curve = small_curve();
    const Calendar calendar;
    const auto schedule =
        build_roll_schedule(calendar, curve, Date(2020, 1, 1), Date(2020, 2, 14));
    mc::PathSet paths(0, 1, 252.0);
    for (std::size_t d = 0; d < schedule.size(); ++d) {
        const auto& state = schedule.at(d);
        paths.append_day({state.date, year_fraction(curve.valuation_date(), state.date), state},
                         {47.25}, {47.25});
    }
    const auto result = replicate_index(paths, schedule, 100.0);
    for (const auto& day : result.values) CHECK(day[0] == doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("no roll window in horizon telescopes the front ratio") {
    const auto curve = small_curve();
    const Calendar calendar;
    // Jan 14 .. Jan 31 sits entirely after January's window.
    const auto schedule =
        build_roll_schedule(calendar, curve, Date(2020, 1, 14), Date(2020, 1, 31));
    mc::PathSet paths(0, 1, 252.0);
    std::vector<double> front;
    for (std::size_t d = 0; d < schedule.size(); ++d) {
        const auto& state = schedule.at(d);
        front.push_back(50.0 + 0.37 * static_cast<double>(d % 5) - 0.11 * static_cast<double>(d));
        paths.append_day({state.date, year_fraction(curve.valuation_date(), state.date), state},
                         {front.back()}, {51.0});
    }
    const auto result = replicate_index(paths, schedule, 250.0);
    CHECK(result.values.back()[0] ==
          doctest::Approx(250.0 * front.back() / front.front()).epsilon(1e-13));
}

TEST_CASE("index value at t ignores prices strictly after t") {
    const auto curve = small_curve();
    const Calendar calendar;
    const auto schedule =
        build_roll_schedule(calendar, curve, Date(2020, 1, 1), Date(2020, 1, 31));
    const std::size_t cut = schedule.size() / 2;

    const auto make_paths = [&](double tail_scale) {
        mc::PathSet paths(0, 1, 252.0);
        for (std::size_t d = 0; d < schedule.size(); ++d) {
            const auto& state = schedule.at(d);
            const double scale = d > cut ? tail_scale : 1.0;
            paths.append_day(
                {state.date, year_fraction(curve.valuation_date(), state.date), state},
                {scale * (50.0 + 0.2 * d)}, {scale * (52.0 + 0.15 * d)});
        }
        return paths;
    };
    const auto base = replicate_index(make_paths(1.0), schedule, 100.0);
    const auto bumped = replicate_index(make_paths(1.3), schedule, 100.0);
    for (std::size_t d = 0; d <= cut; ++d)
        CHECK(base.values[d][0] == bumped.values[d][0]);
    CHECK(base.values.back()[0] != bumped.values.back()[0]);
}

TEST_CASE("schedule mismatch raises DataError") {
    const auto curve = small_curve();
    const Calendar calendar;
    const auto schedule =
        build_roll_schedule(calendar, curve, Date(2020, 1, 1), Date(2020, 1, 15));
    const auto other =
        build_roll_schedule(calendar, curve, Date(2020, 1, 2), Date(2020, 1, 15));
    mc::PathSet paths(0, 1, 252.0);
    for (std::size_t d = 0; d < schedule.size(); ++d) {
        const auto& state = schedule.at(d);
        paths.append_day({state.date, year_fraction(curve.valuation_date(), state.date), state},
                         {50.0}, {52.0});
    }
    CHECK_THROWS_AS(replicate_index(paths, other, 100.0), DataError);
    CHECK_THROWS_AS(replicate_index(paths, schedule, -1.0), DataError);
}

TEST_CASE("streaming accumulator equals stored-path replication") {
    const auto curve = small_curve();
    const Calendar calendar;
    const auto schedule =
        build_roll_schedule(calendar, curve, Date(2020, 1, 1), Date(2020, 3, 31));
    mc::ModelParams params;
    params.mean_reversion = 0.3;
    const auto eta = lv::LocalVolSurface::flat(0.25, 0.3);
    mc::SimConfig config;
    config.particles = 2000;
    config.seed = 77;

    const auto paths = mc::simulate_paths(params, eta, curve, schedule, config);
    const auto replayed = replicate_index(paths, schedule, 100.0);

    gsci::IndexAccumulator accumulator(100.0, {schedule.at(20).date, schedule.last_date()},
                                       true);
    std::vector<mc::DayObserver> obs{accumulator.observer()};
    mc::run_two_factor_simulation(params, eta, curve, schedule, config, obs);

    const auto& snap_mid = accumulator.snapshot(0);
    const auto& snap_end = accumulator.snapshot(1);
    for (std::size_t i = 0; i < config.particles; i += 37) {
        CHECK(snap_mid[i] == replayed.values[20][i]);
        CHECK(snap_end[i] == replayed.values.back()[i]);
    }

    SUBCASE("particle mean of the index stays at I0 within 3 stderr") {
        const auto& means = accumulator.daily_means();
        const auto& ses = accumulator.daily_stderrs();
        for (std::size_t d = 0; d < means.size(); d += 10)
            CHECK(std::fabs(means[d] - 100.0) < 3.0 * std::max(ses[d], 1e-12));
    }
}

TEST_CASE("index paths export to CSV") {
    IndexPaths paths;
    paths.dates = {Date(2020, 1, 2), Date(2020, 1, 3)};
    paths.times = {0.0, 1.0 / 365.0};
    paths.values = {{100.0, 100.0}, {101.5, 99.25}};
    const auto file = (std::filesystem::temp_directory_path() / "index.csv").string();
    paths.save_csv(file);
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    CHECK(line == "date,particle,value");
    std::getline(in, line);
    CHECK(line == "2020-01-02,0,100");
}
