#include "cfslv/losses.hpp"

#include <cmath>
#include <string>

#include "cfslv/errors.hpp"

namespace cfslv::calib {

double loss_p(const std::vector<double>& market, const std::vector<double>& model, double p) {
    if (market.size() != model.size())
        throw DataError("loss_p: market has " + std::to_string(market.size()) +
                        " entries, model " + std::to_string(model.size()));
    if (market.empty()) throw DataError("loss_p: empty residual vector");
    if (p < 1.0) throw ConfigError("loss_p: p must be >= 1");
    double acc = 0.0;
    for (std::size_t j = 0; j < market.size(); ++j)
        acc += std::pow(std::fabs(market[j] - model[j]), p);
    return std::pow(acc, 1.0 / p);
}

double loss_normalized(const std::vector<double>& nov, const std::vector<double>& dec,
                       const std::vector<double>& model, double p,
                       double denominator_floor_rel) {
    if (nov.size() != dec.size() || nov.size() != model.size())
        throw DataError("loss_normalized: snapshot/model size mismatch");
    if (nov.empty()) throw DataError("loss_normalized: empty quote vectors");
    if (p < 1.0) throw ConfigError("loss_normalized: p must be >= 1");

    std::string degenerate;
    for (std::size_t j = 0; j < nov.size(); ++j) {
        const double mean = 0.5 * (nov[j] + dec[j]);
        if (std::fabs(dec[j] - nov[j]) < denominator_floor_rel * std::fabs(mean))
            degenerate += (degenerate.empty() ? "" : ", ") + std::to_string(j);
    }
    if (!degenerate.empty())
        throw DataError("loss_normalized: snapshot spread below floor for quotes " + degenerate);

    double acc = 0.0;
    for (std::size_t j = 0; j < nov.size(); ++j) {
        const double mean = 0.5 * (nov[j] + dec[j]);
        const double width = std::fabs(dec[j] - nov[j]);
        acc += std::pow(std::fabs(mean - model[j]) / width, p);
    }
    return std::pow(acc, 1.0 / p);
}

}  // namespace cfslv::calib
