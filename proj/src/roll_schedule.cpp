#include "cfslv/roll_schedule.hpp"

#include <algorithm>

#include "cfslv/errors.hpp"

namespace cfslv::market {

RollSchedule::RollSchedule(std::vector<RollDay> days) : days_(std::move(days)) {
    if (days_.empty()) throw DataError("roll schedule has no days");
    for (std::size_t i = 1; i < days_.size(); ++i)
        if (days_[i].date <= days_[i - 1].date)
            throw DataError("roll schedule days not strictly ascending");
}

const RollDay& RollSchedule::state_at(const Date& d) const {
    const auto it = std::lower_bound(days_.begin(), days_.end(), d,
                                     [](const RollDay& rd, const Date& x) { return rd.date < x; });
    if (it == days_.end() || it->date != d)
        throw DataError("date " + d.to_iso() + " is not a schedule business day");
    return *it;
}

std::size_t RollSchedule::max_contract_index() const {
    std::size_t m = 0;
    for (const auto& d : days_) m = std::max(m, std::max(d.front, d.second));
    return m;
}

RollSchedule build_roll_schedule(const Calendar& calendar, const FuturesCurve& curve,
                                 const Date& start, const Date& end,
                                 const MaturityMap* maturity_map) {
    if (end < start) throw ConfigError("roll schedule range is empty");

    std::vector<RollDay> days;
    bool have_prev_front = false;
    std::size_t prev_outgoing_front = 0;

    int year = start.year();
    unsigned month = start.month();
    const int last_key = end.year() * 100 + static_cast<int>(end.month());
    while (year * 100 + static_cast<int>(month) <= last_key) {
        const auto bdays = calendar.business_days_in_month(year, month);
        if (bdays.size() < 9)
            throw CalendarError("month " + std::to_string(year) + "-" + std::to_string(month) +
                                " has fewer than 9 business days");
        const Date window_end = bdays[8];  // 9th business day

        std::size_t front;
        const int key = year * 100 + static_cast<int>(month);
        if (maturity_map) {
            const auto it = maturity_map->find(key);
            if (it == maturity_map->end())
                throw ConfigError("maturity map has no entry for month " + std::to_string(key));
            front = it->second;
            if (have_prev_front && front != prev_outgoing_front)
                throw DataError("roll continuity broken in month " + std::to_string(key) +
                                ": incoming front contract differs from previous second");
        } else if (!have_prev_front) {
            // Anchor month: front is the first contract still alive past the
            // roll window; later months advance it one contract per roll.
            front = curve.first_contract_after(window_end);
        } else {
            front = prev_outgoing_front;
        }

        for (std::size_t bi = 0; bi < bdays.size(); ++bi) {
            const Date& d = bdays[bi];
            if (d < start || d > end) continue;
            RollDay rd;
            rd.date = d;
            if (bi < 4) {
                rd.front = front;
                rd.second = front + 1;
                rd.alpha_eod = 1.0;
            } else if (bi <= 8) {
                static constexpr double kWindowAlphas[5] = {0.8, 0.6, 0.4, 0.2, 0.0};
                rd.front = front;
                rd.second = front + 1;
                rd.alpha_eod = kWindowAlphas[bi - 4];
            } else {
                rd.front = front + 1;
                rd.second = front + 2;
                rd.alpha_eod = 1.0;
            }
            if (rd.second >= curve.size())
                throw RangeError("futures curve too short: schedule needs contract index " +
                                 std::to_string(rd.second) + " on " + d.to_iso());
            if (curve.maturities()[rd.front] <= d)
                throw DataError("front contract " + std::to_string(rd.front) +
                                " already expired on " + d.to_iso());
            days.push_back(rd);
        }
        prev_outgoing_front = front + 1;
        have_prev_front = true;
        if (month == 12) {
            ++year;
            month = 1;
        } else {
            ++month;
        }
    }
    if (days.empty())
        throw ConfigError("roll schedule range contains no business days");
    return RollSchedule(std::move(days));
}

}  // namespace cfslv::market
