#include "cfslv/particles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "cfslv/errors.hpp"

namespace cfslv::mc {

ParticleEnsemble ParticleEnsemble::initial(std::size_t n, double v0) {
    ParticleEnsemble e;
    e.spot[0].assign(n, 1.0);
    e.spot[1].assign(n, 1.0);
    e.variance.assign(n, v0);
    e.step_index = 0;
    return e;
}

std::array<double, 3> correlated_increments(const CounterRng& rng, std::uint64_t particle,
                                            std::uint64_t step,
                                            const std::array<std::array<double, 3>, 3>& chol,
                                            double dt, bool antithetic_negate) {
    const auto pair01 = rng.normal_pair(particle, step, 0);
    double z0 = pair01[0], z1 = pair01[1], z2 = rng.normal_single(particle, step, 1);
    if (antithetic_negate) {
        z0 = -z0;
        z1 = -z1;
        z2 = -z2;
    }
    const double sq = std::sqrt(dt);
    return {sq * chol[0][0] * z0,
            sq * (chol[1][0] * z0 + chol[1][1] * z1),
            sq * (chol[2][0] * z0 + chol[2][1] * z1 + chol[2][2] * z2)};
}

double step_variance(double v, double dt, const ModelParams& params, double dw_v) {
    const double v_plus = std::max(v, 0.0);
    return v + params.kappa * (params.theta - v_plus) * dt +
           params.vol_of_vol * std::sqrt(v_plus) * dw_v;
}

double auto_bandwidth(const std::vector<double>& s) {
    const std::size_t n = s.size();
    double sum = 0.0, sumsq = 0.0;
    for (const double x : s) {
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(sumsq / static_cast<double>(n) - mean * mean, 0.0);
    return std::max(1.5 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2), 1e-8);
}

double conditional_variance_ratio(const ParticleEnsemble& ensemble, int factor,
                                  std::size_t particle, double eps) {
    if (!(eps > 0.0)) throw ConfigError("conditional_variance_ratio: eps must be positive");
    const auto& s = ensemble.spot[static_cast<std::size_t>(factor)];
    const auto& v = ensemble.variance;
    const double si = s[particle];
    const double inv2e2 = 0.5 / (eps * eps);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double d = s[j] - si;
        const double w = std::exp(-d * d * inv2e2);
        num += w;
        den += std::max(v[j], 0.0) * w;
    }
    if (den <= 0.0) return 1.0;  // all truncated variances in support vanish
    return std::max(v[particle], 0.0) * num / den;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    std::size_t workers = threads <= 0
                              ? std::max<std::size_t>(std::thread::hardware_concurrency(), 1)
                              : static_cast<std::size_t>(threads);
    workers = std::min<std::size_t>(workers, std::max<std::size_t>(n / 4096, 1));
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

namespace {

// Equal-probability bin edges estimated from a deterministic stride subsample.
void quantile_edges(const std::vector<double>& s, std::size_t bins, std::vector<double>& edges,
                    std::vector<double>& sample) {
    const std::size_t n = s.size();
    const std::size_t stride = std::max<std::size_t>(n / 4096, 1);
    sample.clear();
    for (std::size_t i = 0; i < n; i += stride) sample.push_back(s[i]);
    std::sort(sample.begin(), sample.end());
    edges.clear();
    for (std::size_t b = 1; b < bins; ++b) {
        const double q = static_cast<double>(b) / static_cast<double>(bins);
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(sample.size() - 1));
        edges.push_back(sample[idx]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

struct BinWorkspace {
    std::vector<double> edges, sample, count, vsum, ssum;
    std::vector<double> centers, ccount, cvsum, regression;
    std::vector<std::uint32_t> bin_of, remap, grid;
};

// O(1) expected bin lookup: a uniform grid over the edge span points at the
// first candidate edge, then a short linear scan finishes the search.
class EdgeIndex {
public:
    EdgeIndex(const std::vector<double>& edges, std::vector<std::uint32_t>& grid)
        : edges_(edges) {
        lo_ = edges.front();
        const double hi = edges.back();
        cells_ = 4 * edges.size();
        inv_ = hi > lo_ ? static_cast<double>(cells_) / (hi - lo_) : 0.0;
        grid.assign(cells_ + 1, 0);
        std::size_t e = 0;
        for (std::size_t c = 0; c <= cells_; ++c) {
            const double cell_start = lo_ + static_cast<double>(c) / (inv_ > 0.0 ? inv_ : 1.0);
            while (e < edges.size() && edges[e] <= cell_start) ++e;
            grid[c] = static_cast<std::uint32_t>(e);
        }
        grid_ = &grid;
    }

    std::uint32_t bin(double s) const {
        if (s < lo_ || inv_ <= 0.0) return 0;
        const double pos = (s - lo_) * inv_;
        if (pos >= static_cast<double>(cells_))
            return static_cast<std::uint32_t>(edges_.size());
        auto b = (*grid_)[static_cast<std::size_t>(pos)];
        while (b < edges_.size() && edges_[b] <= s) ++b;
        return b;
    }

private:
    const std::vector<double>& edges_;
    const std::vector<std::uint32_t>* grid_ = nullptr;
    double lo_ = 0.0, inv_ = 0.0;
    std::size_t cells_ = 0;
};

}  // namespace

void conditional_variance_ratios(const std::vector<double>& s, const std::vector<double>& v,
                                 double eps, std::size_t bins, int threads,
                                 std::vector<double>& out) {
    const std::size_t n = s.size();
    out.resize(n);
    if (!(eps > 0.0)) throw ConfigError("conditional_variance_ratios: eps must be positive");

    if (bins == 0 || bins >= n) {
        // Exact double sum, O(N^2): reference mode for tests and small N.
        const double inv2e2 = 0.5 / (eps * eps);
        parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                double num = 0.0, den = 0.0;
                const double si = s[i];
                for (std::size_t j = 0; j < n; ++j) {
                    const double d = s[j] - si;
                    const double w = std::exp(-d * d * inv2e2);
                    num += w;
                    den += std::max(v[j], 0.0) * w;
                }
                out[i] = den > 0.0 ? std::max(v[i], 0.0) * num / den : 1.0;
            }
        });
        return;
    }

    // Binned accelerator: counts and truncated-variance sums per equal-
    // probability bin, kernel sums per bin center, then a linear
    // interpolation of the regression E[v^+ | s] between centers.
    static thread_local BinWorkspace ws;
    quantile_edges(s, bins, ws.edges, ws.sample);
    const auto& edges = ws.edges;
    const std::size_t nb = edges.size() + 1;

    ws.bin_of.resize(n);
    ws.count.assign(nb, 0.0);
    ws.vsum.assign(nb, 0.0);
    ws.ssum.assign(nb, 0.0);
    const EdgeIndex edge_index(edges, ws.grid);
    // Single serial pass: bin assignment plus moment accumulation. Serial so
    // the sums never depend on the thread count.
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t b = edge_index.bin(s[i]);
        ws.bin_of[i] = b;
        ws.count[b] += 1.0;
        ws.vsum[b] += std::max(v[i], 0.0);
        ws.ssum[b] += s[i];
    }

    ws.centers.clear();
    ws.ccount.clear();
    ws.cvsum.clear();
    ws.remap.assign(nb, 0);
    for (std::size_t b = 0; b < nb; ++b) {
        ws.remap[b] = static_cast<std::uint32_t>(ws.centers.size());
        if (ws.count[b] == 0.0) continue;
        ws.centers.push_back(ws.ssum[b] / ws.count[b]);
        ws.ccount.push_back(ws.count[b]);
        ws.cvsum.push_back(ws.vsum[b]);
    }
    const auto& centers = ws.centers;
    const std::size_t m = centers.size();
    ws.regression.assign(m, 0.0);
    auto& regression = ws.regression;  // E[v^+ | s = center_b]
    const double inv2e2 = 0.5 / (eps * eps);
    const double reach = 6.0 * eps;  // kernel support cutoff (relative tail < 2e-8)
    bool all_zero = true;
    for (std::size_t b = 0; b < m; ++b) {
        double num = 0.0, den = 0.0;
        const double cb = centers[b];
        const auto first = static_cast<std::size_t>(
            std::lower_bound(centers.begin(), centers.end(), cb - reach) - centers.begin());
        for (std::size_t c = first; c < m; ++c) {
            const double d = centers[c] - cb;
            if (d > reach) break;
            const double w = std::exp(-d * d * inv2e2);
            num += ws.ccount[c] * w;
            den += ws.cvsum[c] * w;
        }
        regression[b] = num > 0.0 && den > 0.0 ? den / num : 0.0;
        if (regression[b] > 0.0) all_zero = false;
    }
    if (all_zero) {
        std::fill(out.begin(), out.end(), 1.0);
        return;
    }

    const auto& bin_of = ws.bin_of;
    const auto& remap = ws.remap;
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double si = s[i];
            double g;
            if (m == 1 || si <= centers.front()) {
                g = regression.front();
            } else if (si >= centers.back()) {
                g = regression.back();
            } else {
                // the particle's own bin is non-empty; pick the neighbouring
                // center interval by side
                std::size_t j = remap[bin_of[i]];
                if (j >= m) j = m - 1;
                if (si < centers[j])
                    j = j > 0 ? j - 1 : 0;
                if (j + 1 >= m) j = m - 2;
                const double w = (si - centers[j]) / (centers[j + 1] - centers[j]);
                g = (1.0 - w) * regression[j] + w * regression[j + 1];
            }
            out[i] = g > 0.0 ? std::max(v[i], 0.0) / g : 1.0;
        }
    });
}

void step_ensemble(ParticleEnsemble& ensemble, const lv::LocalVolSurface& eta, double t,
                   double dt, const ModelParams& params, const SimConfig& config,
                   const CounterRng& rng) {
    const std::size_t n = ensemble.size();
    const double a = params.mean_reversion;
    const double rho = params.rho_front_second.at(t);
    const auto chol = correlation_cholesky(rho, params.rho_spot_var);
    const double eta_time = t + dt;  // slab covering (t, t+dt]

    // Scratch reused across steps; bound to locals because lambdas see the
    // executing thread's instance of a thread_local, not the caller's.
    static thread_local std::vector<double> ratio_storage[2];
    std::vector<double>& ratio0 = ratio_storage[0];
    std::vector<double>& ratio1 = ratio_storage[1];
    if (config.leverage_lv_only) {
        ratio0.assign(n, 1.0);
        ratio1.assign(n, 1.0);
    } else {
        for (int factor = 0; factor < 2; ++factor) {
            const auto& s = ensemble.spot[static_cast<std::size_t>(factor)];
            const double eps = config.mollifier_bandwidth > 0.0 ? config.mollifier_bandwidth
                                                                : auto_bandwidth(s);
            conditional_variance_ratios(s, ensemble.variance, eps, config.bins, config.threads,
                                        factor == 0 ? ratio0 : ratio1);
        }
    }

    const std::uint64_t step = ensemble.step_index;
    const auto eta_slab = eta.slab(eta_time);
    std::atomic<bool> nan_found{false};
    parallel_for(n, config.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const bool negate = config.antithetic && (i % 2 == 1);
            const std::uint64_t draw_particle = negate ? i - 1 : i;
            const auto dw =
                correlated_increments(rng, draw_particle, step, chol, dt, negate);
            for (int factor = 0; factor < 2; ++factor) {
                auto& s = ensemble.spot[static_cast<std::size_t>(factor)];
                const double r = factor == 0 ? ratio0[i] : ratio1[i];
                const double vol = s[i] * eta_slab.value(s[i]) * std::sqrt(r);
                s[i] += a * (1.0 - s[i]) * dt + vol * dw[static_cast<std::size_t>(factor)];
                if (std::isnan(s[i])) nan_found.store(true, std::memory_order_relaxed);
            }
            ensemble.variance[i] = step_variance(ensemble.variance[i], dt, params, dw[2]);
            if (std::isnan(ensemble.variance[i])) nan_found.store(true, std::memory_order_relaxed);
        }
    });
    if (nan_found.load())
        throw NumericsError("NaN particle state at step " + std::to_string(step));
    ++ensemble.step_index;
}

}  // namespace cfslv::mc
