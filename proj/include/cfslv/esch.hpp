#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace cfslv::calib {

using Objective = std::function<double(const std::vector<double>&)>;

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dimension() const { return lower.size(); }
    void validate() const;
};

struct EschConfig {
    std::size_t parents = 20;
    std::size_t offspring = 40;
    std::size_t budget = 5000;       // total objective evaluations
    double mutation_prob = 0.5;      // chance an offspring mutates one coordinate
    double cauchy_scale_rel = 0.1;   // Cauchy scale as a fraction of the bound width
    std::uint64_t seed = 0;
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t n_evals = 0;
    bool improved = false;           // did any evaluation beat the starting point
    std::vector<double> best_trace;  // best-so-far after each evaluation
};

// Evolutionary search (parents + offspring, single-point crossover, Cauchy
// mutation of one coordinate, truncation selection). Parents start uniform in
// the bounds; an optional initial point replaces the first parent. Never
// evaluates outside the bounds and is deterministic under a fixed seed.
OptimResult esch_minimize(const Objective& f, const Bounds& bounds, const EschConfig& config,
                          const std::vector<double>* initial = nullptr);

}  // namespace cfslv::calib
