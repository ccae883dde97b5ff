#include "cfslv/index_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cfslv/errors.hpp"

namespace cfslv::gsci {

double index_step_nonroll(double index_value, double front_today, double front_tomorrow) {
    if (!(front_today > 0.0) || !(front_tomorrow > 0.0))
        throw DataError("index step: futures prices must be positive");
    return index_value * front_tomorrow / front_today;
}

double index_step_roll(double index_value, double alpha, double front_today, double second_today,
                       double front_tomorrow, double second_tomorrow) {
    if (alpha < 0.0 || alpha > 1.0) throw DataError("index step: alpha outside [0,1]");
    if (!(front_today > 0.0) || !(second_today > 0.0) || !(front_tomorrow > 0.0) ||
        !(second_tomorrow > 0.0))
        throw DataError("index step: futures prices must be positive");
    const double basket_today = alpha * front_today + (1.0 - alpha) * second_today;
    const double basket_tomorrow = alpha * front_tomorrow + (1.0 - alpha) * second_tomorrow;
    return index_value * basket_tomorrow / basket_today;
}

double index_quantity(double index_value, double alpha, double front, double second) {
    return index_value / (alpha * front + (1.0 - alpha) * second);
}

double step_index_value(double index_value, const market::RollDay& prev_state,
                        const market::RollDay& today_state, double front_prev, double second_prev,
                        double front_today, double second_today) {
    if (today_state.front == prev_state.front) {
        if (prev_state.second != today_state.second)
            throw DataError("index step: second contract changed without a completed roll");
        if (prev_state.alpha_eod >= 1.0)
            return index_step_nonroll(index_value, front_prev, front_today);
        return index_step_roll(index_value, prev_state.alpha_eod, front_prev, second_prev,
                               front_today, second_today);
    }
    // Contract pair moved: only legal straight after a completed window, when
    // the former second becomes the new front and alpha was 0.
    if (today_state.front != prev_state.second || prev_state.alpha_eod != 0.0)
        throw DataError("index step: inconsistent roll state between " +
                        prev_state.date.to_iso() + " and " + today_state.date.to_iso());
    return index_step_nonroll(index_value, second_prev, front_today);
}

std::size_t IndexPaths::day_index_of(const Date& d) const {
    for (std::size_t i = 0; i < dates.size(); ++i)
        if (dates[i] == d) return i;
    throw RangeError("date " + d.to_iso() + " not in index paths");
}

void IndexPaths::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write index path file '" + path + "'");
    out << "date,particle,value\n";
    char buf[64];
    for (std::size_t d = 0; d < dates.size(); ++d)
        for (std::size_t p = 0; p < values[d].size(); ++p) {
            std::snprintf(buf, sizeof(buf), "%s,%zu,%.12g\n", dates[d].to_iso().c_str(), p,
                          values[d][p]);
            out << buf;
        }
}

IndexPaths replicate_index(const mc::PathSet& paths, const market::RollSchedule& schedule,
                           double initial_value) {
    if (!(initial_value > 0.0)) throw DataError("replicate_index: initial value must be > 0");
    if (paths.days() == 0) throw DataError("replicate_index: empty path set");

    IndexPaths out;
    const std::size_t n = paths.particles();
    out.dates.reserve(paths.days());
    out.times.reserve(paths.days());
    out.values.reserve(paths.days());

    std::vector<double> current(n, initial_value);
    for (std::size_t d = 0; d < paths.days(); ++d) {
        const auto& rec = paths.record(d);
        // Cross-check against the schedule the caller believes was simulated.
        const auto& sched_state = schedule.state_at(rec.date);
        if (sched_state.front != rec.state.front || sched_state.second != rec.state.second ||
            sched_state.alpha_eod != rec.state.alpha_eod)
            throw DataError("replicate_index: schedule mismatch on " + rec.date.to_iso());
        if (d > 0) {
            const auto& prev = paths.record(d - 1);
            for (std::size_t i = 0; i < n; ++i)
                current[i] = step_index_value(current[i], prev.state, rec.state,
                                              paths.front(d - 1)[i], paths.second(d - 1)[i],
                                              paths.front(d)[i], paths.second(d)[i]);
        }
        out.dates.push_back(rec.date);
        out.times.push_back(rec.t);
        out.values.push_back(current);
    }
    return out;
}

IndexAccumulator::IndexAccumulator(double initial_value, std::vector<Date> snapshot_dates,
                                   bool record_daily_stats)
    : initial_value_(initial_value),
      snapshot_dates_(std::move(snapshot_dates)),
      record_daily_stats_(record_daily_stats) {
    if (!(initial_value_ > 0.0)) throw DataError("index accumulator: initial value must be > 0");
    std::sort(snapshot_dates_.begin(), snapshot_dates_.end());
    snapshot_dates_.erase(std::unique(snapshot_dates_.begin(), snapshot_dates_.end()),
                          snapshot_dates_.end());
}

const std::vector<double>& IndexAccumulator::snapshot(std::size_t i) const {
    if (i >= snapshots_.size())
        throw RangeError("index snapshot " + std::to_string(i) + " not recorded (got " +
                         std::to_string(snapshots_.size()) + ")");
    return snapshots_[i];
}

mc::DayObserver IndexAccumulator::observer() {
    return [this](const mc::DayContext& ctx) {
        const std::size_t n = ctx.front_prices->size();
        if (!has_prev_) {
            current_.assign(n, initial_value_);
            has_prev_ = true;
        } else {
            for (std::size_t i = 0; i < n; ++i)
                current_[i] = step_index_value(current_[i], prev_state_, ctx.state,
                                               prev_front_[i], prev_second_[i],
                                               (*ctx.front_prices)[i], (*ctx.second_prices)[i]);
        }
        prev_state_ = ctx.state;
        prev_front_ = *ctx.front_prices;
        prev_second_ = *ctx.second_prices;

        if (std::binary_search(snapshot_dates_.begin(), snapshot_dates_.end(), ctx.date)) {
            snapshots_.push_back(current_);
            snapshot_times_.push_back(ctx.t);
        }
        if (record_daily_stats_) {
            double mean = 0.0;
            for (const double v : current_) mean += v;
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (const double v : current_) var += (v - mean) * (v - mean);
            var /= static_cast<double>(n > 1 ? n - 1 : 1);
            daily_dates_.push_back(ctx.date);
            daily_means_.push_back(mean);
            daily_stderrs_.push_back(std::sqrt(var / static_cast<double>(n)));
        }
    };
}

}  // namespace cfslv::gsci
