#pragma once

#include <vector>

namespace cfslv::calib {

// p-norm of the residual vector between market and model prices:
// f_p = (sum_j |market_j - model_j|^p)^(1/p), p >= 1.
double loss_p(const std::vector<double>& market, const std::vector<double>& model, double p);

// Consensus-normalized loss over two quote snapshots:
// fhat_p = (sum_j |mean_j - model_j|^p / |dec_j - nov_j|^p)^(1/p)
// with mean = (nov + dec)/2. Summands below (1/2)^p iff the model price lies
// inside the snapshot interval. Denominators are floored at
// max(|dec-nov|, denominator_floor_rel * |mean|); a denominator below the
// floor raises DataError listing the offending quotes.
double loss_normalized(const std::vector<double>& nov, const std::vector<double>& dec,
                       const std::vector<double>& model, double p,
                       double denominator_floor_rel = 1e-4);

}  // namespace cfslv::calib
