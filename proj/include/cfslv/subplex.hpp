#pragma once

#include <cstddef>
#include <vector>

#include "cfslv/esch.hpp"  // Objective, OptimResult

namespace cfslv::calib {

struct SubplexConfig {
    std::vector<double> scale = {0.1};  // initial steps; broadcast when size 1
    double psi = 0.25;                  // simplex reduction coefficient
    double omega = 0.1;                 // step reduction coefficient
    double reflect = 1.0;               // alpha
    double contract = 0.5;              // beta
    double expand = 2.0;                // gamma
    double shrink = 0.5;                // delta
    std::size_t nsmin = 2;
    std::size_t nsmax = 5;
    std::size_t budget = 10000;
    double xtol = 1e-10;                // outer relative step termination
};

// Test/diagnostic hook: spreads recorded around every Nelder-Mead shrink and
// the best value after every subspace search.
struct SubplexTrace {
    std::vector<double> shrink_spread_ratios;
    std::vector<double> subspace_best_values;
    std::vector<std::vector<std::size_t>> partitions;
};

// Coordinate sizes of the subspace partition: all in [nsmin, nsmax] (capped
// at n) and summing to n, largest first.
std::vector<std::size_t> subplex_partition_sizes(std::size_t n, std::size_t nsmin,
                                                 std::size_t nsmax);

// Rowan's subplex: Nelder-Mead on adaptively chosen coordinate subspaces with
// step-size rescaling between sweeps. Terminates on the step-size criterion
// or budget exhaustion; `improved` is false when no evaluation beat f(x0).
OptimResult subplex_minimize(const Objective& f, const std::vector<double>& x0,
                             const SubplexConfig& config, SubplexTrace* trace = nullptr);

}  // namespace cfslv::calib
