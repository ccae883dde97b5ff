#pragma once

#include <vector>

#include "cfslv/dates.hpp"
#include "cfslv/roll_schedule.hpp"
#include "cfslv/simulation.hpp"

namespace cfslv::gsci {

// Excess-return index update over one business day holding the front
// contract: I' = I * F_front_tomorrow / F_front_today.
double index_step_nonroll(double index_value, double front_today, double front_tomorrow);

// Roll-period update with front quantity weight alpha set at the end of the
// first day: I' = I * (a F_c' + (1-a) F_f') / (a F_c + (1-a) F_f).
double index_step_roll(double index_value, double alpha, double front_today, double second_today,
                       double front_tomorrow, double second_tomorrow);

// Quantity of the fictitious blended contract bought at these prices.
double index_quantity(double index_value, double alpha, double front, double second);

// One particle-day transition keyed off the previous day's roll state. The
// contract pair may only change after a completed window (alpha 0).
double step_index_value(double index_value, const market::RollDay& prev_state,
                        const market::RollDay& today_state, double front_prev, double second_prev,
                        double front_today, double second_today);

struct IndexPaths {
    std::vector<Date> dates;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // [day][particle]

    std::size_t days() const { return dates.size(); }
    std::size_t particles() const { return values.empty() ? 0 : values[0].size(); }
    std::size_t day_index_of(const Date& d) const;

    void save_csv(const std::string& path) const;  // date,particle,value
};

// Replays the index day by day over stored futures paths. The schedule is
// cross-checked against the states recorded in the path set.
IndexPaths replicate_index(const mc::PathSet& paths, const market::RollSchedule& schedule,
                           double initial_value);

// Streaming replication for large particle counts: plug into the simulation
// as an observer; snapshots are taken on the requested dates and per-day
// mean/stderr recorded when requested.
class IndexAccumulator {
public:
    IndexAccumulator(double initial_value, std::vector<Date> snapshot_dates,
                     bool record_daily_stats = false);

    mc::DayObserver observer();

    const std::vector<Date>& snapshot_dates() const { return snapshot_dates_; }
    // Index values per particle at snapshot date i (simulation order).
    const std::vector<double>& snapshot(std::size_t i) const;
    double snapshot_time(std::size_t i) const { return snapshot_times_.at(i); }

    const std::vector<Date>& daily_dates() const { return daily_dates_; }
    const std::vector<double>& daily_means() const { return daily_means_; }
    const std::vector<double>& daily_stderrs() const { return daily_stderrs_; }

private:
    double initial_value_;
    std::vector<Date> snapshot_dates_;
    bool record_daily_stats_;
    std::vector<double> current_;
    std::vector<double> prev_front_, prev_second_;
    bool has_prev_ = false;
    market::RollDay prev_state_;
    std::vector<std::vector<double>> snapshots_;
    std::vector<double> snapshot_times_;
    std::vector<Date> daily_dates_;
    std::vector<double> daily_means_, daily_stderrs_;
};

}  // namespace cfslv::gsci
