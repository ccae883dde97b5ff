#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace cfslv {

// Calendar date backed by a serial day count (days since 1970-01-01,
// proleptic Gregorian). All year fractions in the library are ACT/365 fixed.
class Date {
public:
    Date() = default;
    Date(int year, unsigned month, unsigned day);

    // Parses "YYYY-MM-DD". Throws DataError on malformed input.
    static Date from_iso(const std::string& iso);
    static Date from_serial(std::int64_t serial) { return Date(serial); }

    std::int64_t serial() const { return serial_; }
    int year() const;
    unsigned month() const;
    unsigned day() const;

    // 0 = Monday ... 6 = Sunday.
    int weekday() const;
    bool is_weekend() const { return weekday() >= 5; }

    std::string to_iso() const;

    Date operator+(std::int64_t days) const { return Date(serial_ + days); }
    Date operator-(std::int64_t days) const { return Date(serial_ - days); }
    std::int64_t operator-(const Date& rhs) const { return serial_ - rhs.serial_; }
    auto operator<=>(const Date&) const = default;

private:
    explicit Date(std::int64_t serial) : serial_(serial) {}
    std::int64_t serial_ = 0;
};

// ACT/365F year fraction between two dates.
inline double year_fraction(const Date& from, const Date& to) {
    return static_cast<double>(to - from) / 365.0;
}

// Business-day calendar: weekends are always closed, plus an optional
// holiday list. The library default is a weekends-only calendar since
// exchange calendars are licensed data.
class Calendar {
public:
    Calendar() = default;
    explicit Calendar(std::vector<Date> holidays);

    // Loads one ISO date per line; '#' starts a comment.
    static Calendar from_holiday_file(const std::string& path);

    bool is_business_day(const Date& d) const;
    Date next_business_day(const Date& d) const;       // first business day >= d
    Date following_business_day(const Date& d) const;  // first business day > d

    // Business days of the given month, in order.
    std::vector<Date> business_days_in_month(int year, unsigned month) const;

    // All business days in [from, to].
    std::vector<Date> business_days_between(const Date& from, const Date& to) const;

private:
    std::vector<std::int64_t> holidays_;  // sorted serials
};

}  // namespace cfslv
