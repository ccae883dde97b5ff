#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cfslv/dates.hpp"
#include "cfslv/errors.hpp"
#include "cfslv/market_data.hpp"
#include "cfslv/roll_schedule.hpp"

using namespace cfslv;
using namespace cfslv::market;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

FuturesCurve monthly_curve(int n_contracts = 18) {
    const Date valuation(2019, 12, 16);
    std::vector<Date> maturities;
    std::vector<double> prices;
    int year = 2020;
    unsigned month = 1;
    for (int i = 0; i < n_contracts; ++i) {
        maturities.emplace_back(year, month, 20);
        const double tau = year_fraction(valuation, maturities.back());
        prices.push_back(60.0 * std::exp(-0.04 * tau));
        if (++month > 12) {
            month = 1;
            ++year;
        }
    }
    return FuturesCurve(valuation, std::move(maturities), std::move(prices));
}

}  // namespace

TEST_CASE("dates parse, format and count weekdays") {
    const Date d = Date::from_iso("2019-12-16");
    CHECK(d.to_iso() == "2019-12-16");
    CHECK(d.weekday() == 0);  // a Monday
    CHECK(Date(2019, 12, 21).is_weekend());
    CHECK(Date::from_iso("2020-02-29").to_iso() == "2020-02-29");
    CHECK_THROWS_AS(Date::from_iso("2019-13-01"), DataError);
    CHECK_THROWS_AS(Date::from_iso("not-a-date"), DataError);
    CHECK(year_fraction(Date(2020, 1, 1), Date(2021, 1, 1)) == doctest::Approx(366.0 / 365.0));
}

TEST_CASE("calendar skips weekends and holidays") {
    Calendar weekends_only;
    CHECK(weekends_only.is_business_day(Date(2019, 12, 16)));
    CHECK_FALSE(weekends_only.is_business_day(Date(2019, 12, 14)));
    CHECK(weekends_only.next_business_day(Date(2019, 12, 14)) == Date(2019, 12, 16));

    Calendar with_holiday({Date(2019, 12, 25)});
    CHECK_FALSE(with_holiday.is_business_day(Date(2019, 12, 25)));
    const auto dec = with_holiday.business_days_in_month(2019, 12);
    CHECK(dec.size() == 21);  // 22 weekdays minus Christmas
}

TEST_CASE("futures curve loader validates and sorts") {
    const Date valuation(2020, 1, 1);

    SUBCASE("minimal valid input") {
        const auto path = write_temp("curve_min.csv",
                                     "maturity_date,price\n2020-02-20,50\n2020-03-20,51\n");
        const auto curve = load_futures_curve(path, valuation);
        CHECK(curve.size() == 2);
        CHECK(curve.price(0) == 50.0);
    }
    SUBCASE("rows out of order load the same as sorted input") {
        const auto shuffled = write_temp("curve_shuffled.csv",
                                         "maturity_date,price\n2020-03-20,51\n2020-02-20,50\n");
        const auto curve = load_futures_curve(shuffled, valuation);
        CHECK(curve.maturities()[0] == Date(2020, 2, 20));
        CHECK(curve.price(0) == 50.0);
        CHECK(curve.price(1) == 51.0);
    }
    SUBCASE("negative price names the row") {
        const auto path = write_temp("curve_neg.csv",
                                     "maturity_date,price\n2020-02-20,50\n2020-03-20,-1\n");
        CHECK_THROWS_WITH_AS(load_futures_curve(path, valuation),
                             doctest::Contains("row 3"), DataError);
    }
    SUBCASE("duplicate maturity rejected") {
        const auto path = write_temp("curve_dup.csv",
                                     "maturity_date,price\n2020-02-20,50\n2020-02-20,51\n");
        CHECK_THROWS_AS(load_futures_curve(path, valuation), DataError);
    }
    SUBCASE("fewer than two rows rejected") {
        const auto path = write_temp("curve_one.csv", "maturity_date,price\n2020-02-20,50\n");
        CHECK_THROWS_AS(load_futures_curve(path, valuation), DataError);
    }
}

TEST_CASE("discount curve interpolates log-linearly") {
    SUBCASE("t=0 gives exactly 1") {
        const DiscountCurve flat = DiscountCurve::flat(0.02);
        CHECK(flat.discount(0.0) == 1.0);
    }
    SUBCASE("zero rate is identically 1") {
        const DiscountCurve zero = DiscountCurve::flat(0.0);
        for (const double t : {0.1, 0.5, 1.0, 7.3}) CHECK(zero.discount(t) == doctest::Approx(1.0));
    }
    SUBCASE("flat 2% at t=1") {
        const DiscountCurve curve({0.5, 2.0}, {std::exp(-0.01), std::exp(-0.04)});
        CHECK(curve.discount(1.0) == doctest::Approx(0.980199).epsilon(1e-6));
    }
    SUBCASE("beyond the last pillar raises RangeError") {
        const DiscountCurve curve({1.0}, {0.99});
        CHECK_THROWS_AS(curve.discount(1.5), RangeError);
    }
    SUBCASE("increasing discount factors rejected") {
        CHECK_THROWS_AS(DiscountCurve({0.5, 1.0}, {0.97, 0.99}), DataError);
    }
}

TEST_CASE("quote loader handles both units and validates rows") {
    const Date valuation(2019, 12, 16);
    const auto path = write_temp(
        "quotes.csv",
        "kind,expiry,underlying,strike_or_moneyness,quote_type,value,quote_date\n"
        "on_futures,0.25,2020-04-20,55.0,vol,0.25,2019-12-16\n"
        "on_index,1.0,,0.9,price,8.5,2019-11-30\n");
    const auto quotes = load_quotes(path, valuation);
    REQUIRE(quotes.size() == 2);
    CHECK(quotes.quotes[0].kind == QuoteKind::OnIndex);  // sorted by quote date
    CHECK(quotes.quotes[1].unit == QuoteUnit::ImpliedVol);

    const auto bad = write_temp(
        "quotes_bad.csv",
        "kind,expiry,underlying,strike_or_moneyness,quote_type,value,quote_date\n"
        "on_futures,0.5,2020-04-20,55.0,price,-3,2019-12-16\n");
    CHECK_THROWS_AS(load_quotes(bad, valuation), DataError);

    // expiry after the contract maturity
    const auto late = write_temp(
        "quotes_late.csv",
        "kind,expiry,underlying,strike_or_moneyness,quote_type,value,quote_date\n"
        "on_futures,0.6,2020-04-20,55.0,price,3,2019-12-16\n");
    CHECK_THROWS_AS(load_quotes(late, valuation), DataError);
}

TEST_CASE("quote save/load round trip is loss-free") {
    const Date valuation(2019, 12, 16);
    QuoteSet set;
    VanillaQuote q;
    q.kind = QuoteKind::OnFutures;
    q.expiry = 0.2534246575342466;
    q.underlying = Date(2020, 4, 20);
    q.strike_or_moneyness = 57.123456789;
    q.unit = QuoteUnit::Price;
    q.value = 1.234567890123;
    q.quote_date = valuation;
    set.quotes.push_back(q);
    const auto path = (std::filesystem::temp_directory_path() / "roundtrip.csv").string();
    save_quotes(set, path);
    const auto loaded = load_quotes(path, valuation);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded.quotes[0].value == doctest::Approx(q.value).epsilon(1e-12));
    CHECK(loaded.quotes[0].strike_or_moneyness ==
          doctest::Approx(q.strike_or_moneyness).epsilon(1e-12));
}

TEST_CASE("roll schedule mechanics") {
    const Calendar calendar;
    const auto curve = monthly_curve();
    const Date start(2019, 12, 16);
    const Date end(2020, 6, 30);
    const auto schedule = build_roll_schedule(calendar, curve, start, end);

    SUBCASE("roll days are the 5th..9th business days with the documented alphas") {
        const auto jan = calendar.business_days_in_month(2020, 1);
        const double expected[] = {0.8, 0.6, 0.4, 0.2, 0.0};
        for (int i = 0; i < 5; ++i) {
            const auto& day = schedule.state_at(jan[4 + i]);
            CHECK(day.alpha_eod == doctest::Approx(expected[i]));
        }
        // every generated month carries exactly the multiset {0.8,0.6,0.4,0.2,0}
        for (unsigned month = 1; month <= 6; ++month) {
            std::vector<double> alphas;
            for (const auto& day : schedule.days())
                if (day.date.month() == month && day.alpha_eod < 1.0)
                    alphas.push_back(day.alpha_eod);
            REQUIRE(alphas.size() == 5);
            for (int i = 0; i < 5; ++i) CHECK(alphas[i] == doctest::Approx(expected[i]));
        }
    }
    SUBCASE("alpha is 1 before the window") {
        const auto jan = calendar.business_days_in_month(2020, 1);
        for (int i = 0; i < 4; ++i) CHECK(schedule.state_at(jan[i]).alpha_eod == 1.0);
    }
    SUBCASE("the second contract becomes the new front after the window") {
        const auto& days = schedule.days();
        for (std::size_t i = 1; i < days.size(); ++i) {
            if (days[i].front != days[i - 1].front) {
                CHECK(days[i - 1].alpha_eod == 0.0);
                CHECK(days[i].front == days[i - 1].second);
            }
        }
    }
    SUBCASE("front contract never expires while held") {
        for (const auto& day : schedule.days())
            CHECK(curve.maturities()[day.front] > day.date);
    }
    SUBCASE("too-short month raises CalendarError") {
        // A calendar where almost all of February is a holiday.
        std::vector<Date> holidays;
        for (int d = 1; d <= 29; ++d)
            if (!Date(2020, 2, d).is_weekend() && d > 8) holidays.emplace_back(2020, 2, d);
        const Calendar crippled(holidays);
        CHECK_THROWS_AS(build_roll_schedule(crippled, curve, Date(2020, 2, 1), Date(2020, 2, 28)),
                        CalendarError);
    }
    SUBCASE("explicit maturity map is honored") {
        MaturityMap map;
        map[201912] = 1;
        map[202001] = 2;
        const auto custom = build_roll_schedule(calendar, curve, start, Date(2020, 1, 31), &map);
        CHECK(custom.state_at(Date(2019, 12, 16)).front == 2);  // after December window
        const auto jan = calendar.business_days_in_month(2020, 1);
        CHECK(custom.state_at(jan[0]).front == 2);
        CHECK(custom.state_at(jan[10]).front == 3);
    }
}
