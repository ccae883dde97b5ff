#include "cfslv/subplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfslv/errors.hpp"

namespace cfslv::calib {

std::vector<std::size_t> subplex_partition_sizes(std::size_t n, std::size_t nsmin,
                                                 std::size_t nsmax) {
    if (n == 0) throw ConfigError("subplex: zero dimension");
    nsmin = std::min(nsmin, n);
    nsmax = std::min(std::max(nsmax, nsmin), n);
    std::vector<std::size_t> sizes;
    std::size_t left = n;
    while (left > 0) {
        std::size_t take = std::min(nsmax, left);
        const std::size_t remainder = left - take;
        if (remainder > 0 && remainder < nsmin) {
            // Shift coordinates into the remainder so it stays >= nsmin.
            const std::size_t deficit = nsmin - remainder;
            if (take < nsmin + deficit)
                throw ConfigError("subplex: cannot partition dimension " + std::to_string(n) +
                                  " with nsmin=" + std::to_string(nsmin) +
                                  " nsmax=" + std::to_string(nsmax));
            take -= deficit;
        }
        sizes.push_back(take);
        left -= take;
    }
    return sizes;
}

namespace {

struct Vertex {
    std::vector<double> y;  // subspace coordinates
    double value = 0.0;
};

double spread_l1(const std::vector<Vertex>& simplex) {
    double worst = 0.0;
    for (std::size_t j = 1; j < simplex.size(); ++j) {
        double d = 0.0;
        for (std::size_t i = 0; i < simplex[0].y.size(); ++i)
            d += std::fabs(simplex[j].y[i] - simplex[0].y[i]);
        worst = std::max(worst, d);
    }
    return worst;
}

}  // namespace

OptimResult subplex_minimize(const Objective& f, const std::vector<double>& x0,
                             const SubplexConfig& config, SubplexTrace* trace) {
    const std::size_t n = x0.size();
    if (n == 0) throw ConfigError("subplex: empty starting point");
    if (config.budget == 0) {
        OptimResult res;
        res.x = x0;
        res.value = f(x0);
        res.n_evals = 1;
        return res;
    }
    std::vector<double> scale = config.scale;
    if (scale.size() == 1) scale.assign(n, scale[0]);
    if (scale.size() != n) throw ConfigError("subplex: scale dimension mismatch");
    for (const double s : scale)
        if (!(s > 0.0)) throw ConfigError("subplex: scale entries must be positive");
    if (config.nsmin > config.nsmax)
        throw ConfigError("subplex: nsmin > nsmax");

    OptimResult result;
    result.x = x0;
    result.value = f(x0);
    result.n_evals = 1;
    result.best_trace.push_back(result.value);

    const auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        ++result.n_evals;
        if (v < result.value) {
            result.value = v;
            result.x = x;
            result.improved = true;
        }
        result.best_trace.push_back(result.value);
        return v;
    };

    std::vector<double> x = x0;
    double fx = result.value;
    std::vector<double> step = scale;
    std::vector<double> dx(n, 0.0);

    // Nelder-Mead restricted to the coordinates in `coords`. Returns when the
    // simplex L1 spread has shrunk below psi times its initial spread.
    const auto nelder_mead = [&](const std::vector<std::size_t>& coords) {
        const std::size_t ns = coords.size();
        std::vector<double> full = x;
        const auto eval_sub = [&](const std::vector<double>& y) {
            for (std::size_t i = 0; i < ns; ++i) full[coords[i]] = y[i];
            return eval(full);
        };

        std::vector<Vertex> simplex(ns + 1);
        simplex[0].y.resize(ns);
        for (std::size_t i = 0; i < ns; ++i) simplex[0].y[i] = x[coords[i]];
        simplex[0].value = fx;
        for (std::size_t j = 1; j <= ns; ++j) {
            if (result.n_evals >= config.budget) return;  // incomplete simplex
            simplex[j].y = simplex[0].y;
            simplex[j].y[j - 1] += step[coords[j - 1]];
            simplex[j].value = eval_sub(simplex[j].y);
        }
        const double initial_spread = spread_l1(simplex);
        if (initial_spread <= 0.0) return;

        const auto order = [&] {
            std::stable_sort(simplex.begin(), simplex.end(),
                             [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
        };
        order();

        while (result.n_evals < config.budget) {
            if (spread_l1(simplex) < config.psi * initial_spread) break;

            std::vector<double> centroid(ns, 0.0);
            for (std::size_t j = 0; j < ns; ++j)
                for (std::size_t i = 0; i < ns; ++i) centroid[i] += simplex[j].y[i];
            for (double& cval : centroid) cval /= static_cast<double>(ns);

            const Vertex& worst = simplex[ns];
            std::vector<double> reflected(ns);
            for (std::size_t i = 0; i < ns; ++i)
                reflected[i] = centroid[i] + config.reflect * (centroid[i] - worst.y[i]);
            const double f_r = eval_sub(reflected);

            if (f_r < simplex[0].value) {
                // Try expanding past the reflection.
                if (result.n_evals < config.budget) {
                    std::vector<double> expanded(ns);
                    for (std::size_t i = 0; i < ns; ++i)
                        expanded[i] = centroid[i] + config.expand * (reflected[i] - centroid[i]);
                    const double f_e = eval_sub(expanded);
                    if (f_e < f_r) {
                        simplex[ns] = {expanded, f_e};
                    } else {
                        simplex[ns] = {reflected, f_r};
                    }
                } else {
                    simplex[ns] = {reflected, f_r};
                }
            } else if (f_r < simplex[ns - 1].value) {
                simplex[ns] = {reflected, f_r};
            } else {
                // Contract toward the better of worst/reflected.
                const bool outside = f_r < worst.value;
                std::vector<double> contracted(ns);
                const auto& anchor = outside ? reflected : worst.y;
                for (std::size_t i = 0; i < ns; ++i)
                    contracted[i] = centroid[i] + config.contract * (anchor[i] - centroid[i]);
                if (result.n_evals >= config.budget) break;
                const double f_c = eval_sub(contracted);
                if (f_c < std::min(f_r, worst.value)) {
                    simplex[ns] = {contracted, f_c};
                } else {
                    // Shrink all vertices toward the best.
                    const double before = spread_l1(simplex);
                    for (std::size_t j = 1; j <= ns; ++j) {
                        if (result.n_evals >= config.budget) break;
                        for (std::size_t i = 0; i < ns; ++i)
                            simplex[j].y[i] = simplex[0].y[i] +
                                              config.shrink * (simplex[j].y[i] - simplex[0].y[i]);
                        simplex[j].value = eval_sub(simplex[j].y);
                    }
                    if (trace) {
                        const double after = spread_l1(simplex);
                        trace->shrink_spread_ratios.push_back(after / before);
                    }
                }
            }
            order();
        }

        order();
        // Accept the subspace best; never worsens the incumbent by NM descent.
        if (simplex[0].value <= fx) {
            for (std::size_t i = 0; i < ns; ++i) x[coords[i]] = simplex[0].y[i];
            fx = simplex[0].value;
        }
        if (trace) trace->subspace_best_values.push_back(fx);
    };

    while (result.n_evals < config.budget) {
        // Order coordinates by recent progress (first sweep: by step size).
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        const std::vector<double>& key =
            std::any_of(dx.begin(), dx.end(), [](double v) { return v != 0.0; }) ? dx : step;
        std::stable_sort(perm.begin(), perm.end(), [&](std::size_t i, std::size_t j) {
            return std::fabs(key[i]) > std::fabs(key[j]);
        });

        const auto sizes = subplex_partition_sizes(n, config.nsmin, config.nsmax);
        if (trace) {
            trace->partitions.emplace_back(sizes);
        }

        const std::vector<double> x_before = x;
        std::size_t cursor = 0;
        for (const std::size_t sz : sizes) {
            std::vector<std::size_t> coords(perm.begin() + static_cast<long>(cursor),
                                            perm.begin() + static_cast<long>(cursor + sz));
            cursor += sz;
            nelder_mead(coords);
            if (result.n_evals >= config.budget) break;
        }

        // Termination on both recent progress and remaining step size, so a
        // single stalled sweep cannot stop the search while steps are large.
        double dx_norm = 0.0, step_norm = 0.0, rel_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] = x[i] - x_before[i];
            dx_norm += std::fabs(dx[i]);
            step_norm += std::fabs(step[i]);
            rel_change = std::max(rel_change, std::max(std::fabs(dx[i]), std::fabs(step[i])) /
                                                  std::max(std::fabs(x[i]), 1.0));
        }
        if (rel_change < config.xtol) break;

        // Rescale steps by the progress made, clamped to [omega, 1/omega].
        const double factor =
            std::clamp(step_norm > 0.0 ? dx_norm / step_norm : config.omega, config.omega,
                       1.0 / config.omega);
        for (std::size_t i = 0; i < n; ++i) {
            const double magnitude = std::fabs(step[i]) * factor;
            step[i] = dx[i] != 0.0 ? std::copysign(magnitude, dx[i]) : magnitude;
        }
    }

    return result;
}

}  // namespace cfslv::calib
