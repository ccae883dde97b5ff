#include "cfslv/esch.hpp"

#include <algorithm>
#include <cmath>

#include "cfslv/errors.hpp"
#include "cfslv/rng.hpp"

namespace cfslv::calib {

void Bounds::validate() const {
    if (lower.size() != upper.size() || lower.empty())
        throw ConfigError("bounds: lower/upper size mismatch or empty");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i]))
            throw ConfigError("bounds: need lower < upper in coordinate " + std::to_string(i));
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw ConfigError("bounds must be finite");
    }
}

namespace {

struct Individual {
    std::vector<double> x;
    double value = 0.0;
};

}  // namespace

OptimResult esch_minimize(const Objective& f, const Bounds& bounds, const EschConfig& config,
                          const std::vector<double>* initial) {
    bounds.validate();
    const std::size_t dim = bounds.dimension();
    if (config.parents < 2 || config.offspring < 1)
        throw ConfigError("esch: need at least 2 parents and 1 offspring");
    if (config.budget < config.parents + config.offspring)
        throw ConfigError("esch: budget smaller than one generation");
    if (initial && initial->size() != dim)
        throw ConfigError("esch: initial point dimension mismatch");

    const CounterRng rng(derive_seed(config.seed, "esch"));
    std::uint64_t draw = 0;
    const auto uniform01 = [&] { return rng.uniform(0, draw++, 0); };
    const auto uniform_index = [&](std::size_t n) {
        return std::min(static_cast<std::size_t>(uniform01() * static_cast<double>(n)), n - 1);
    };

    OptimResult result;
    result.best_trace.reserve(config.budget);

    std::vector<Individual> parents(config.parents);
    const auto evaluate = [&](Individual& ind) {
        ind.value = f(ind.x);
        ++result.n_evals;
        if (result.n_evals == 1 || ind.value < result.value) {
            if (result.n_evals > 1 && ind.value < result.value) result.improved = true;
            result.value = ind.value;
            result.x = ind.x;
        }
        result.best_trace.push_back(result.value);
    };

    for (std::size_t pi = 0; pi < config.parents; ++pi) {
        auto& ind = parents[pi];
        ind.x.resize(dim);
        if (pi == 0 && initial) {
            ind.x = *initial;
        } else {
            for (std::size_t i = 0; i < dim; ++i)
                ind.x[i] = bounds.lower[i] + (bounds.upper[i] - bounds.lower[i]) * uniform01();
        }
        evaluate(ind);
    }

    std::vector<Individual> offspring(config.offspring);
    while (result.n_evals + 1 <= config.budget) {
        const std::size_t room = config.budget - result.n_evals;
        const std::size_t batch = std::min(config.offspring, room);
        for (std::size_t oi = 0; oi < batch; ++oi) {
            auto& child = offspring[oi];
            // Single-point crossover of two distinct parents.
            const std::size_t pa = uniform_index(config.parents);
            std::size_t pb = uniform_index(config.parents);
            if (pb == pa) pb = (pb + 1) % config.parents;
            const std::size_t cut = dim > 1 ? 1 + uniform_index(dim - 1) : 0;
            child.x.resize(dim);
            for (std::size_t i = 0; i < dim; ++i)
                child.x[i] = i < cut ? parents[pa].x[i] : parents[pb].x[i];
            // Cauchy mutation of one random coordinate, clamped into bounds.
            if (uniform01() < config.mutation_prob) {
                const std::size_t mi = uniform_index(dim);
                const double width = bounds.upper[mi] - bounds.lower[mi];
                const double cauchy =
                    std::tan(3.14159265358979323846 * (uniform01() - 0.5));
                child.x[mi] = std::clamp(child.x[mi] + config.cauchy_scale_rel * width * cauchy,
                                         bounds.lower[mi], bounds.upper[mi]);
            }
            evaluate(child);
        }
        // Truncation selection over the joint pool; stable to keep determinism.
        std::vector<Individual> pool;
        pool.reserve(config.parents + batch);
        for (auto& p : parents) pool.push_back(std::move(p));
        for (std::size_t oi = 0; oi < batch; ++oi) pool.push_back(std::move(offspring[oi]));
        std::stable_sort(pool.begin(), pool.end(),
                         [](const Individual& a, const Individual& b) { return a.value < b.value; });
        for (std::size_t pi = 0; pi < config.parents; ++pi) parents[pi] = std::move(pool[pi]);
    }
    return result;
}

}  // namespace cfslv::calib
