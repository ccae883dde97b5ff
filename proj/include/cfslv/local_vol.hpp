#pragma once

#include <string>
#include <vector>

namespace cfslv::lv {

// Local volatility eta(t, k) of the normalized spot on a knot lattice.
// Interpolation: piecewise-constant in time (left-continuous: the value at
// knot t_m rules the interval (t_{m-1}, t_m]), piecewise-linear in strike,
// flat extrapolation on both axes.
class LocalVolSurface {
public:
    LocalVolSurface(double mean_reversion, std::vector<double> time_knots,
                    std::vector<double> strike_knots, std::vector<std::vector<double>> values,
                    double cap = 5.0);

    static LocalVolSurface flat(double eta, double mean_reversion);

    double value(double t, double k) const;

    // Time-slab view: resolves the time knot once so per-particle lookups
    // reduce to the strike interpolation.
    class Slab {
    public:
        Slab(const std::vector<double>& strikes, const std::vector<double>& row)
            : strikes_(strikes), row_(row) {}
        double value(double k) const;

    private:
        const std::vector<double>& strikes_;
        const std::vector<double>& row_;
    };
    Slab slab(double t) const;

    // Mean-reversion speed the surface was calibrated with.
    double mean_reversion() const { return mean_reversion_; }
    const std::vector<double>& time_knots() const { return time_knots_; }
    const std::vector<double>& strike_knots() const { return strike_knots_; }
    const std::vector<std::vector<double>>& values() const { return values_; }
    double cap() const { return cap_; }

    // JSON round trip; doubles are written in shortest-representation form so
    // save/load reproduces the surface bit-exactly.
    std::string to_json() const;
    static LocalVolSurface from_json(const std::string& json_text);
    void save(const std::string& path) const;
    static LocalVolSurface load(const std::string& path);

private:
    double mean_reversion_;
    std::vector<double> time_knots_;
    std::vector<double> strike_knots_;
    std::vector<std::vector<double>> values_;  // [time][strike]
    double cap_;
};

}  // namespace cfslv::lv
