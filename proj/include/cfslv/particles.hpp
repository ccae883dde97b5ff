#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "cfslv/local_vol.hpp"
#include "cfslv/model_params.hpp"
#include "cfslv/rng.hpp"

namespace cfslv::mc {

// Interacting-particle state of the two driving factors. The variance process
// is shared between factors; it may go transiently negative in state, every
// coefficient evaluation truncates it at zero.
struct ParticleEnsemble {
    std::array<std::vector<double>, 2> spot;  // normalized spots per factor, start 1
    std::vector<double> variance;             // start v0
    std::size_t step_index = 0;

    static ParticleEnsemble initial(std::size_t n, double v0);
    std::size_t size() const { return variance.size(); }
};

// Correlated Brownian increments (dW_c, dW_f, dW_v) over dt for one particle
// and step, from the Cholesky factor of the 3x3 correlation matrix.
std::array<double, 3> correlated_increments(const CounterRng& rng, std::uint64_t particle,
                                            std::uint64_t step,
                                            const std::array<std::array<double, 3>, 3>& chol,
                                            double dt, bool antithetic_negate = false);

// Full-truncation Euler update of the variance:
// v' = v + kappa (theta - v^+) dt + chi sqrt(v^+) dW.
double step_variance(double v, double dt, const ModelParams& params, double dw_v);

// Exact O(N) single-particle estimate of v_i^+ / E[v^+ | s = s_i] with a
// Gaussian mollifier of bandwidth eps. When every truncated variance in the
// kernel support vanishes the ratio defaults to 1.
double conditional_variance_ratio(const ParticleEnsemble& ensemble, int factor,
                                  std::size_t particle, double eps);

// Silverman-style bandwidth 1.5 sigma(s) N^{-1/5}, floored away from zero.
double auto_bandwidth(const std::vector<double>& s);

// Conditional variance ratios for a whole factor. bins = 0 uses the exact
// O(N^2) double sum; otherwise particles are bucketed into equal-probability
// bins and kernel sums are evaluated per bin center, O(N + bins^2).
void conditional_variance_ratios(const std::vector<double>& s, const std::vector<double>& v,
                                 double eps, std::size_t bins, int threads,
                                 std::vector<double>& out);

// One Euler step of both factors and the shared variance over (t, t+dt].
// eta is evaluated at the slab covering the interval (lookup at t+dt).
void step_ensemble(ParticleEnsemble& ensemble, const lv::LocalVolSurface& eta, double t,
                   double dt, const ModelParams& params, const SimConfig& config,
                   const CounterRng& rng);

// Deterministic range partitioner; results never depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace cfslv::mc
