#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfslv/dates.hpp"

namespace cfslv::market {

// Initial futures term structure F_0(T_i) on a maturity grid.
// Immutable after construction; maturities strictly ascending, prices > 0,
// and at least two contracts (the two-factor reconstruction needs
// consecutive maturities).
class FuturesCurve {
public:
    FuturesCurve(Date valuation_date, std::vector<Date> maturities, std::vector<double> prices);

    const Date& valuation_date() const { return valuation_date_; }
    const std::vector<Date>& maturities() const { return maturities_; }
    const std::vector<double>& prices() const { return prices_; }
    std::size_t size() const { return maturities_.size(); }

    // Initial price of contract i (0-based, in maturity order).
    double price(std::size_t i) const;
    // Maturity of contract i as an ACT/365 year fraction from valuation.
    double maturity_time(std::size_t i) const;

    // Price for an exact maturity date. Throws RangeError when the date is
    // not a curve pillar (the model has no meaning between contracts).
    double price_at(const Date& maturity) const;

    // Index of the first contract with maturity strictly after `d`.
    // Throws RangeError when no such contract exists.
    std::size_t first_contract_after(const Date& d) const;

private:
    Date valuation_date_;
    std::vector<Date> maturities_;
    std::vector<double> prices_;
};

// Zero-coupon curve P_0(t) with log-linear interpolation in the discount
// factor. P_0(0) = 1 and P_0 is non-increasing.
class DiscountCurve {
public:
    DiscountCurve(std::vector<double> times, std::vector<double> discounts);

    static DiscountCurve flat(double rate, double horizon = 50.0);

    double discount(double t) const;
    double last_pillar() const { return times_.back(); }

private:
    std::vector<double> times_;
    std::vector<double> log_discounts_;
};

enum class QuoteKind { OnFutures, OnIndex };
enum class QuoteUnit { Price, ImpliedVol };

// A single vanilla quote. Futures quotes carry an absolute strike and the
// underlying contract maturity; index quotes are keyed by moneyness
// (forward = I_0 by convention).
struct VanillaQuote {
    QuoteKind kind = QuoteKind::OnFutures;
    double expiry = 0.0;                    // year fraction from valuation
    std::optional<Date> underlying;         // futures contract maturity
    double strike_or_moneyness = 0.0;
    QuoteUnit unit = QuoteUnit::Price;
    double value = 0.0;
    Date quote_date;

    void validate(const Date& valuation) const;
};

struct QuoteSet {
    std::vector<VanillaQuote> quotes;

    std::size_t size() const { return quotes.size(); }
    bool empty() const { return quotes.empty(); }
};

// Loaders for the CSV interfaces. All deterministic and order-insensitive
// (rows are sorted on load).
FuturesCurve load_futures_curve(const std::string& path, const Date& valuation_date);
DiscountCurve load_discount_curve(const std::string& path);
QuoteSet load_quotes(const std::string& path, const Date& valuation_date);

void save_quotes(const QuoteSet& quotes, const std::string& path);

}  // namespace cfslv::market
