#include "cfslv/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cfslv/errors.hpp"

namespace cfslv::market {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            out.emplace_back();
        } else {
            const auto last = field.find_last_not_of(" \t\r");
            out.push_back(field.substr(first, last - first + 1));
        }
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw DataError("");
        return v;
    } catch (...) {
        throw DataError("cannot parse number '" + s + "' in " + context);
    }
}

std::vector<std::string> read_nonempty_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[line.find_first_not_of(" \t\r")] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

FuturesCurve::FuturesCurve(Date valuation_date, std::vector<Date> maturities,
                           std::vector<double> prices)
    : valuation_date_(valuation_date),
      maturities_(std::move(maturities)),
      prices_(std::move(prices)) {
    if (maturities_.size() != prices_.size())
        throw DataError("futures curve: maturity/price size mismatch");
    if (maturities_.size() < 2)
        throw DataError("futures curve needs at least 2 contracts, got " +
                        std::to_string(maturities_.size()));
    // Sort jointly by maturity so loaders are order-insensitive.
    std::vector<std::size_t> order(maturities_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return maturities_[a] < maturities_[b]; });
    std::vector<Date> sorted_mat;
    std::vector<double> sorted_px;
    sorted_mat.reserve(order.size());
    sorted_px.reserve(order.size());
    for (const auto i : order) {
        sorted_mat.push_back(maturities_[i]);
        sorted_px.push_back(prices_[i]);
    }
    maturities_ = std::move(sorted_mat);
    prices_ = std::move(sorted_px);

    for (std::size_t i = 0; i < maturities_.size(); ++i) {
        if (maturities_[i] <= valuation_date_)
            throw DataError("futures maturity " + maturities_[i].to_iso() +
                            " not after valuation date " + valuation_date_.to_iso());
        if (i > 0 && maturities_[i] == maturities_[i - 1])
            throw DataError("duplicate futures maturity " + maturities_[i].to_iso());
        if (!(prices_[i] > 0.0))
            throw DataError("non-positive futures price " + std::to_string(prices_[i]) +
                            " at maturity " + maturities_[i].to_iso());
    }
}

double FuturesCurve::price(std::size_t i) const {
    if (i >= prices_.size()) throw RangeError("futures contract index out of range");
    return prices_[i];
}

double FuturesCurve::maturity_time(std::size_t i) const {
    if (i >= maturities_.size()) throw RangeError("futures contract index out of range");
    return year_fraction(valuation_date_, maturities_[i]);
}

double FuturesCurve::price_at(const Date& maturity) const {
    const auto it = std::lower_bound(maturities_.begin(), maturities_.end(), maturity);
    if (it == maturities_.end() || *it != maturity)
        throw RangeError("maturity " + maturity.to_iso() + " is not a curve pillar");
    return prices_[static_cast<std::size_t>(it - maturities_.begin())];
}

std::size_t FuturesCurve::first_contract_after(const Date& d) const {
    const auto it = std::upper_bound(maturities_.begin(), maturities_.end(), d);
    if (it == maturities_.end())
        throw RangeError("no futures contract matures after " + d.to_iso());
    return static_cast<std::size_t>(it - maturities_.begin());
}

DiscountCurve::DiscountCurve(std::vector<double> times, std::vector<double> discounts) {
    if (times.size() != discounts.size() || times.empty())
        throw DataError("discount curve: need matching non-empty pillars");
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    times_.reserve(times.size() + 1);
    log_discounts_.reserve(times.size() + 1);
    times_.push_back(0.0);
    log_discounts_.push_back(0.0);  // P_0(0) = 1
    double prev_log = 0.0;
    for (const auto i : order) {
        const double t = times[i];
        const double df = discounts[i];
        if (t < 0.0) throw DataError("discount pillar at negative time");
        if (t == 0.0) {
            if (std::fabs(df - 1.0) > 1e-12) throw DataError("P_0(0) must equal 1");
            continue;
        }
        if (!times_.empty() && t == times_.back())
            throw DataError("duplicate discount pillar at t=" + std::to_string(t));
        if (!(df > 0.0) || df > 1.0 + 1e-12)
            throw DataError("discount factor out of (0,1] at t=" + std::to_string(t));
        const double log_df = std::log(df);
        if (log_df > prev_log + 1e-12)
            throw DataError("discount curve increasing at t=" + std::to_string(t));
        times_.push_back(t);
        log_discounts_.push_back(log_df);
        prev_log = log_df;
    }
    if (times_.size() < 2) throw DataError("discount curve has no positive pillar");
}

DiscountCurve DiscountCurve::flat(double rate, double horizon) {
    return DiscountCurve({horizon}, {std::exp(-rate * horizon)});
}

double DiscountCurve::discount(double t) const {
    if (t < 0.0) throw RangeError("discount factor asked at negative time");
    if (t > times_.back() + 1e-12)
        throw RangeError("discount time " + std::to_string(t) + " beyond last pillar " +
                         std::to_string(times_.back()));
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it != times_.end() && *it == t)
        return std::exp(log_discounts_[static_cast<std::size_t>(it - times_.begin())]);
    const std::size_t hi = std::min(static_cast<std::size_t>(it - times_.begin()),
                                    times_.size() - 1);
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return std::exp((1.0 - w) * log_discounts_[lo] + w * log_discounts_[hi]);
}

void VanillaQuote::validate(const Date& valuation) const {
    if (!(expiry > 0.0)) throw DataError("quote expiry must be positive");
    if (!(strike_or_moneyness > 0.0)) throw DataError("quote strike/moneyness must be positive");
    if (!(value > 0.0)) throw DataError("quote value must be positive");
    if (kind == QuoteKind::OnFutures) {
        if (!underlying) throw DataError("futures quote missing underlying maturity");
        const double t_mat = year_fraction(valuation, *underlying);
        if (expiry > t_mat + 1e-9)
            throw DataError("futures quote expiry " + std::to_string(expiry) +
                            " after contract maturity " + underlying->to_iso());
    }
}

FuturesCurve load_futures_curve(const std::string& path, const Date& valuation_date) {
    auto lines = read_nonempty_lines(path);
    if (lines.empty()) throw DataError("futures curve file '" + path + "' is empty");
    std::size_t start = 0;
    if (lines[0].find("maturity_date") != std::string::npos) start = 1;
    std::vector<Date> maturities;
    std::vector<double> prices;
    for (std::size_t i = start; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 2)
            throw DataError("futures curve row " + std::to_string(i + 1) +
                            ": expected 'maturity_date,price'");
        maturities.push_back(Date::from_iso(fields[0]));
        const double px = parse_number(fields[1], "futures curve row " + std::to_string(i + 1));
        if (!(px > 0.0))
            throw DataError("futures curve row " + std::to_string(i + 1) +
                            " (maturity " + fields[0] + "): non-positive price");
        prices.push_back(px);
    }
    return FuturesCurve(valuation_date, std::move(maturities), std::move(prices));
}

DiscountCurve load_discount_curve(const std::string& path) {
    auto lines = read_nonempty_lines(path);
    if (lines.empty()) throw DataError("discount file '" + path + "' is empty");
    std::size_t start = 0;
    if (lines[0].find("discount_factor") != std::string::npos) start = 1;
    std::vector<double> times, dfs;
    for (std::size_t i = start; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 2)
            throw DataError("discount row " + std::to_string(i + 1) +
                            ": expected 'time,discount_factor'");
        times.push_back(parse_number(fields[0], "discount row " + std::to_string(i + 1)));
        dfs.push_back(parse_number(fields[1], "discount row " + std::to_string(i + 1)));
    }
    return DiscountCurve(std::move(times), std::move(dfs));
}

QuoteSet load_quotes(const std::string& path, const Date& valuation_date) {
    auto lines = read_nonempty_lines(path);
    if (lines.empty()) throw DataError("quote file '" + path + "' is empty");
    std::size_t start = 0;
    if (lines[0].find("quote_type") != std::string::npos) start = 1;
    QuoteSet set;
    for (std::size_t i = start; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 7)
            throw DataError("quote row " + std::to_string(i + 1) +
                            ": expected 7 columns "
                            "(kind,expiry,underlying,strike_or_moneyness,quote_type,value,quote_date)");
        VanillaQuote q;
        if (fields[0] == "on_futures")
            q.kind = QuoteKind::OnFutures;
        else if (fields[0] == "on_index")
            q.kind = QuoteKind::OnIndex;
        else
            throw DataError("quote row " + std::to_string(i + 1) + ": unknown kind '" +
                            fields[0] + "'");
        q.expiry = parse_number(fields[1], "quote row " + std::to_string(i + 1));
        if (!fields[2].empty()) q.underlying = Date::from_iso(fields[2]);
        q.strike_or_moneyness = parse_number(fields[3], "quote row " + std::to_string(i + 1));
        if (fields[4] == "price")
            q.unit = QuoteUnit::Price;
        else if (fields[4] == "vol")
            q.unit = QuoteUnit::ImpliedVol;
        else
            throw DataError("quote row " + std::to_string(i + 1) + ": unknown quote_type '" +
                            fields[4] + "'");
        q.value = parse_number(fields[5], "quote row " + std::to_string(i + 1));
        q.quote_date = Date::from_iso(fields[6]);
        try {
            q.validate(valuation_date);
        } catch (const DataError& e) {
            throw DataError("quote row " + std::to_string(i + 1) + ": " + e.what());
        }
        set.quotes.push_back(q);
    }
    // Deterministic ordering regardless of file order.
    std::stable_sort(set.quotes.begin(), set.quotes.end(),
                     [](const VanillaQuote& a, const VanillaQuote& b) {
                         if (a.quote_date != b.quote_date) return a.quote_date < b.quote_date;
                         if (a.expiry != b.expiry) return a.expiry < b.expiry;
                         return a.strike_or_moneyness < b.strike_or_moneyness;
                     });
    return set;
}

void save_quotes(const QuoteSet& quotes, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write quote file '" + path + "'");
    out << "kind,expiry,underlying,strike_or_moneyness,quote_type,value,quote_date\n";
    for (const auto& q : quotes.quotes) {
        out << (q.kind == QuoteKind::OnFutures ? "on_futures" : "on_index") << ',';
        char buf[512];
        std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g,%s,%.17g,%s\n", q.expiry,
                      q.underlying ? q.underlying->to_iso().c_str() : "",
                      q.strike_or_moneyness,
                      q.unit == QuoteUnit::Price ? "price" : "vol", q.value,
                      q.quote_date.to_iso().c_str());
        out << buf;
    }
}

}  // namespace cfslv::market
