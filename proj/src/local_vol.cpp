#include "cfslv/local_vol.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cfslv/errors.hpp"
#include "json.hpp"

namespace cfslv::lv {

namespace {
void check_ascending(const std::vector<double>& v, const char* what) {
    if (v.empty()) throw ConfigError(std::string(what) + " knots empty");
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            throw ConfigError(std::string(what) + " knots not strictly ascending");
}
}  // namespace

LocalVolSurface::LocalVolSurface(double mean_reversion, std::vector<double> time_knots,
                                 std::vector<double> strike_knots,
                                 std::vector<std::vector<double>> values, double cap)
    : mean_reversion_(mean_reversion),
      time_knots_(std::move(time_knots)),
      strike_knots_(std::move(strike_knots)),
      values_(std::move(values)),
      cap_(cap) {
    if (mean_reversion_ < 0.0) throw ParamError("local vol: mean reversion must be >= 0");
    check_ascending(time_knots_, "time");
    check_ascending(strike_knots_, "strike");
    if (values_.size() != time_knots_.size())
        throw ConfigError("local vol: values rows != time knots");
    for (const auto& row : values_) {
        if (row.size() != strike_knots_.size())
            throw ConfigError("local vol: values cols != strike knots");
        for (const double v : row)
            if (!(v > 0.0) || v > cap_)
                throw ConfigError("local vol value " + std::to_string(v) +
                                  " outside (0, cap=" + std::to_string(cap_) + "]");
    }
}

LocalVolSurface LocalVolSurface::flat(double eta, double mean_reversion) {
    return LocalVolSurface(mean_reversion, {1.0}, {1.0}, {{eta}});
}

double LocalVolSurface::Slab::value(double k) const {
    const auto& ks = strikes_;
    if (k <= ks.front()) return row_.front();
    if (k >= ks.back()) return row_.back();
    const std::size_t hi = std::upper_bound(ks.begin(), ks.end(), k) - ks.begin();
    const std::size_t lo = hi - 1;
    const double w = (k - ks[lo]) / (ks[hi] - ks[lo]);
    return (1.0 - w) * row_[lo] + w * row_[hi];
}

LocalVolSurface::Slab LocalVolSurface::slab(double t) const {
    // Piecewise constant in time, left-continuous: first knot with t_m >= t.
    std::size_t ti = std::lower_bound(time_knots_.begin(), time_knots_.end(), t) -
                     time_knots_.begin();
    if (ti >= time_knots_.size()) ti = time_knots_.size() - 1;  // flat beyond last knot
    return Slab(strike_knots_, values_[ti]);
}

double LocalVolSurface::value(double t, double k) const { return slab(t).value(k); }

std::string LocalVolSurface::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["a"] = mean_reversion_;
    j["cap"] = cap_;
    j["time_knots"] = time_knots_;
    j["strike_knots"] = strike_knots_;
    j["values"] = values_;
    return j.dump(2);
}

LocalVolSurface LocalVolSurface::from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw DataError(std::string("local vol JSON parse failure: ") + e.what());
    }
    try {
        return LocalVolSurface(j.at("a").get<double>(),
                               j.at("time_knots").get<std::vector<double>>(),
                               j.at("strike_knots").get<std::vector<double>>(),
                               j.at("values").get<std::vector<std::vector<double>>>(),
                               j.value("cap", 5.0));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("local vol JSON missing field: ") + e.what());
    }
}

void LocalVolSurface::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write local vol file '" + path + "'");
    out << to_json() << '\n';
}

LocalVolSurface LocalVolSurface::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open local vol file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace cfslv::lv
