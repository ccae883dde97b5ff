#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "cfslv/dates.hpp"
#include "cfslv/market_data.hpp"

namespace cfslv::market {

// Per-business-day roll state. `alpha_eod` is the front-contract quantity
// weight set at the end of the day: 1 outside roll windows, then
// 0.8, 0.6, 0.4, 0.2, 0.0 across the 5th..9th business days of each month.
// Contract ids are indices into the futures curve.
struct RollDay {
    Date date;
    std::size_t front = 0;
    std::size_t second = 0;
    double alpha_eod = 1.0;
};

class RollSchedule {
public:
    explicit RollSchedule(std::vector<RollDay> days);

    const std::vector<RollDay>& days() const { return days_; }
    std::size_t size() const { return days_.size(); }

    const RollDay& at(std::size_t i) const { return days_[i]; }
    // State for an exact schedule date; throws DataError if absent.
    const RollDay& state_at(const Date& d) const;

    const Date& first_date() const { return days_.front().date; }
    const Date& last_date() const { return days_.back().date; }

    // Largest contract index any schedule day references.
    std::size_t max_contract_index() const;

private:
    std::vector<RollDay> days_;
};

// month key = year*100 + month; value = index of the contract that is front
// going into that month's roll window.
using MaturityMap = std::map<int, std::size_t>;

// Builds the schedule over all business days in [start, end]. When no
// explicit maturity map is given, the incoming front for each month is the
// first contract maturing strictly after that month's 9th business day.
// Throws CalendarError if a month has fewer than 9 business days and
// RangeError when the curve runs out of contracts before `end`.
RollSchedule build_roll_schedule(const Calendar& calendar, const FuturesCurve& curve,
                                 const Date& start, const Date& end,
                                 const MaturityMap* maturity_map = nullptr);

}  // namespace cfslv::market
