#include "cfslv/dates.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

#include "cfslv/errors.hpp"

namespace cfslv {

namespace {

// Civil-from-days and days-from-civil, Howard Hinnant's algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::array<int, 3> civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

unsigned days_in_month(int y, unsigned m) {
    static const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[m - 1];
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month))
        throw DataError("invalid calendar date " + std::to_string(year) + "-" +
                        std::to_string(month) + "-" + std::to_string(day));
    serial_ = days_from_civil(year, month, day);
}

Date Date::from_iso(const std::string& iso) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(iso.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
        throw DataError("cannot parse ISO date '" + iso + "'");
    return Date(y, m, d);
}

int Date::year() const { return civil_from_days(serial_)[0]; }
unsigned Date::month() const { return static_cast<unsigned>(civil_from_days(serial_)[1]); }
unsigned Date::day() const { return static_cast<unsigned>(civil_from_days(serial_)[2]); }

int Date::weekday() const {
    // 1970-01-01 was a Thursday (weekday 3 with Monday = 0).
    std::int64_t w = (serial_ + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w);
}

std::string Date::to_iso() const {
    const auto c = civil_from_days(serial_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c[0], c[1], c[2]);
    return buf;
}

Calendar::Calendar(std::vector<Date> holidays) {
    holidays_.reserve(holidays.size());
    for (const auto& h : holidays) holidays_.push_back(h.serial());
    std::sort(holidays_.begin(), holidays_.end());
    holidays_.erase(std::unique(holidays_.begin(), holidays_.end()), holidays_.end());
}

Calendar Calendar::from_holiday_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open holiday file '" + path + "'");
    std::vector<Date> holidays;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        holidays.push_back(Date::from_iso(line.substr(first, last - first + 1)));
    }
    return Calendar(std::move(holidays));
}

bool Calendar::is_business_day(const Date& d) const {
    if (d.is_weekend()) return false;
    return !std::binary_search(holidays_.begin(), holidays_.end(), d.serial());
}

Date Calendar::next_business_day(const Date& d) const {
    Date cur = d;
    while (!is_business_day(cur)) cur = cur + 1;
    return cur;
}

Date Calendar::following_business_day(const Date& d) const { return next_business_day(d + 1); }

std::vector<Date> Calendar::business_days_in_month(int year, unsigned month) const {
    std::vector<Date> out;
    const Date first(year, month, 1);
    const Date last = first + (days_in_month(year, month) - 1);
    for (Date d = first; d <= last; d = d + 1)
        if (is_business_day(d)) out.push_back(d);
    return out;
}

std::vector<Date> Calendar::business_days_between(const Date& from, const Date& to) const {
    std::vector<Date> out;
    for (Date d = from; d <= to; d = d + 1)
        if (is_business_day(d)) out.push_back(d);
    return out;
}

}  // namespace cfslv
