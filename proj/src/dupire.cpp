#include "cfslv/dupire.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "cfslv/errors.hpp"

namespace cfslv::lv {

namespace {
std::atomic<std::uint64_t> g_pde_solves{0};
}

std::uint64_t pde_solve_count() { return g_pde_solves.load(); }

double effective_strike(double t, double maturity, double strike, double f0, double a) {
    if (maturity < t) throw DomainError("effective_strike: option expiry after futures maturity");
    if (!(strike > 0.0) || !(f0 > 0.0))
        throw DomainError("effective_strike: strike and futures price must be positive");
    return 1.0 - std::exp(a * (maturity - t)) * (1.0 - strike / f0);
}

double futures_from_spot(double s, double t, double maturity, double f0, double a) {
    if (maturity < t) throw DomainError("futures_from_spot: time after maturity");
    return f0 * (1.0 - (1.0 - s) * std::exp(-a * (maturity - t)));
}

double local_vol_futures(const LocalVolSurface& eta, double t, double maturity, double strike,
                         double f0) {
    const double a = eta.mean_reversion();
    const double floor = f0 * (1.0 - std::exp(-a * (maturity - t)));
    const double multiplier = strike - floor;
    if (multiplier < 0.0)
        throw DomainError("local_vol_futures: strike " + std::to_string(strike) +
                          " below the model floor " + std::to_string(floor));
    const double k = effective_strike(t, maturity, strike, f0, a);
    return multiplier * eta.value(t, k);
}

NormalizedCallGrid::NormalizedCallGrid(double mean_reversion, std::vector<double> strikes,
                                       std::vector<double> times,
                                       std::vector<std::vector<double>> layers)
    : mean_reversion_(mean_reversion),
      strikes_(std::move(strikes)),
      times_(std::move(times)),
      layers_(std::move(layers)) {}

double NormalizedCallGrid::value(double t, double k) const {
    if (t < times_.front() - 1e-12 || t > times_.back() + 1e-12)
        throw RangeError("normalized call grid: time " + std::to_string(t) +
                         " outside solved horizon");
    t = std::clamp(t, times_.front(), times_.back());

    const auto k_eval = [&](const std::vector<double>& layer, double kk) {
        const auto& ks = strikes_;
        if (kk < ks.front()) return layer.front() + (ks.front() - kk);  // linear payoff regime
        if (kk >= ks.back()) return 0.0;
        const std::size_t hi = std::upper_bound(ks.begin(), ks.end(), kk) - ks.begin();
        const std::size_t lo = hi - 1;
        const double w = (kk - ks[lo]) / (ks[hi] - ks[lo]);
        return (1.0 - w) * layer[lo] + w * layer[hi];
    };

    const auto it = std::lower_bound(times_.begin(), times_.end(), t - 1e-12);
    const std::size_t hi = std::min(static_cast<std::size_t>(it - times_.begin()),
                                    times_.size() - 1);
    if (std::fabs(times_[hi] - t) < 1e-12 || hi == 0) return k_eval(layers_[hi], k);
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return (1.0 - w) * k_eval(layers_[lo], k) + w * k_eval(layers_[hi], k);
}

std::size_t NormalizedCallGrid::layer_index(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t - 1e-12);
    if (it == times_.end() || std::fabs(*it - t) > 1e-12)
        throw RangeError("no stored PDE layer at t=" + std::to_string(t));
    return static_cast<std::size_t>(it - times_.begin());
}

namespace {

// Tridiagonal solve (Thomas). Overwrites rhs with the solution.
void solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                       const std::vector<double>& upper, std::vector<double>& rhs,
                       std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    double pivot = diag[0];
    if (pivot == 0.0) throw NumericsError("tridiagonal pivot breakdown");
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * scratch[i];
        if (pivot == 0.0) throw NumericsError("tridiagonal pivot breakdown");
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

struct OperatorRows {
    std::vector<double> lower, diag, upper;  // interior rows 1..m-1
};

// Spatial operator A with eta frozen on a time slab. Row i holds
// A c|_i = -a c_i - a(1-k_i) d_k c_i + 1/2 k_i^2 eta_i^2 d_k^2 c_i.
OperatorRows build_operator(const std::vector<double>& k, double a,
                            const LocalVolSurface& eta, double slab_time) {
    const std::size_t m = k.size() - 1;
    const double h = k[1] - k[0];
    OperatorRows op;
    op.lower.assign(m + 1, 0.0);
    op.diag.assign(m + 1, 0.0);
    op.upper.assign(m + 1, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        const double eta_i = eta.value(slab_time, k[i]);
        const double diffusion = 0.5 * k[i] * k[i] * eta_i * eta_i;
        const double wind = -a * (1.0 - k[i]);
        const bool upwind = std::fabs(wind) * h > 2.0 * diffusion;
        const double dh2 = diffusion / (h * h);
        if (!upwind) {
            op.lower[i] = dh2 - wind / (2.0 * h);
            op.diag[i] = -2.0 * dh2 - a;
            op.upper[i] = dh2 + wind / (2.0 * h);
        } else if (wind > 0.0) {
            op.lower[i] = dh2;
            op.diag[i] = -2.0 * dh2 - a - wind / h;
            op.upper[i] = dh2 + wind / h;
        } else {
            op.lower[i] = dh2 - wind / h;
            op.diag[i] = -2.0 * dh2 - a + wind / h;
            op.upper[i] = dh2;
        }
    }
    return op;
}

// Cell-averaged initial payoff keeps second-order accuracy through the kink.
double cell_averaged_payoff(double k, double h) {
    const double lo = k - 0.5 * h;
    const double hi = k + 0.5 * h;
    if (hi <= 1.0) return 1.0 - k;
    if (lo >= 1.0) return 0.0;
    return 0.5 * (1.0 - lo) * (1.0 - lo) / h;
}

}  // namespace

NormalizedCallGrid solve_normalized_calls(const LocalVolSurface& eta, double mean_reversion,
                                          const PdeGridSpec& grid) {
    if (!(grid.k_max > grid.k_min) || grid.k_min < 0.0)
        throw ConfigError("PDE grid: need 0 <= k_min < k_max");
    if (grid.k_cells < 3) throw ConfigError("PDE grid: too few strike cells");
    if (!(grid.horizon > 0.0)) throw ConfigError("PDE grid: non-positive horizon");
    if (!(grid.steps_per_year > 0.0)) throw ConfigError("PDE grid: non-positive time resolution");

    const double a = mean_reversion;
    const std::size_t m = grid.k_cells;
    const double h = (grid.k_max - grid.k_min) / static_cast<double>(m);
    std::vector<double> k(m + 1);
    for (std::size_t i = 0; i <= m; ++i) k[i] = grid.k_min + h * static_cast<double>(i);

    // Breakpoints: mandatory output times plus eta time knots, so each solver
    // interval sits inside one eta slab and quote expiries land on layers.
    std::vector<double> breaks{0.0, grid.horizon};
    for (const double t : grid.mandatory_times)
        if (t > 0.0 && t < grid.horizon) breaks.push_back(t);
    for (const double t : eta.time_knots())
        if (t > 0.0 && t < grid.horizon) breaks.push_back(t);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
                 breaks.end());

    if (grid.rannacher_halfsteps % 2 != 0 || grid.rannacher_halfsteps < 0)
        throw ConfigError("PDE grid: rannacher_halfsteps must be even and non-negative");

    std::vector<double> times{0.0};
    std::vector<std::vector<double>> layers;
    std::vector<double> c(m + 1);
    for (std::size_t i = 0; i <= m; ++i) c[i] = cell_averaged_payoff(k[i], h);
    c[0] = 1.0 - k[0];
    c[m] = 0.0;
    layers.push_back(c);

    const double c_left = 1.0 - grid.k_min;  // Dirichlet: c(t, k_min) = E[s_t] - k_min
    const std::size_t n_int = m - 1;         // interior nodes 1..m-1
    std::vector<double> rhs(n_int), scratch, lo(n_int), di(n_int), up(n_int);

    const auto take_step = [&](const OperatorRows& op, double step_dt, double theta) {
        for (std::size_t i = 1; i < m; ++i) {
            double r = c[i];
            if (theta < 1.0) {
                const double w = (1.0 - theta) * step_dt;
                r += w * (op.lower[i] * c[i - 1] + op.diag[i] * c[i] + op.upper[i] * c[i + 1]);
            }
            rhs[i - 1] = r;
            lo[i - 1] = -theta * step_dt * op.lower[i];
            di[i - 1] = 1.0 - theta * step_dt * op.diag[i];
            up[i - 1] = -theta * step_dt * op.upper[i];
        }
        // Dirichlet boundaries folded into the edge rows (right boundary is 0).
        rhs[0] -= lo[0] * c_left;
        lo[0] = 0.0;
        up[n_int - 1] = 0.0;
        solve_tridiagonal(lo, di, up, rhs, scratch);
        for (std::size_t i = 1; i < m; ++i) {
            double v = rhs[i - 1];
            if (std::isnan(v)) throw NumericsError("PDE solution NaN");
            if (v < 0.0) {
                if (v < -1e-8)
                    throw NumericsError("PDE solution negative (" + std::to_string(v) + ")");
                v = 0.0;
            }
            c[i] = v;
        }
        c[0] = c_left;
        c[m] = 0.0;
    };

    int rannacher_left = grid.rannacher_halfsteps;
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        const double t_a = breaks[b];
        const double t_b = breaks[b + 1];
        const auto wanted = static_cast<std::size_t>(
            std::ceil((t_b - t_a) * grid.steps_per_year - 1e-9));
        const std::size_t steps = std::max<std::size_t>(wanted, 1);
        const double dt = (t_b - t_a) / static_cast<double>(steps);
        // eta is piecewise constant, left-continuous: the value at the slab's
        // right end rules the whole interval.
        const OperatorRows op = build_operator(k, a, eta, t_b);

        for (std::size_t done = 0; done < steps; ++done) {
            if (rannacher_left > 0) {
                take_step(op, 0.5 * dt, 1.0);
                take_step(op, 0.5 * dt, 1.0);
                rannacher_left -= 2;
            } else {
                take_step(op, dt, 0.5);
            }
            times.push_back(t_a + dt * static_cast<double>(done + 1));
            layers.push_back(c);
        }
    }

    g_pde_solves.fetch_add(1);
    return NormalizedCallGrid(a, std::move(k), std::move(times), std::move(layers));
}

double vanilla_price_on_futures(const NormalizedCallGrid& solution, double t, double maturity,
                                double strike, double f0, const market::DiscountCurve& discount,
                                bool allow_low_extrapolation) {
    const double a = solution.mean_reversion();
    const double k = effective_strike(t, maturity, strike, f0, a);
    if (k < solution.strikes().front() && !allow_low_extrapolation)
        throw RangeError("effective strike " + std::to_string(k) + " below the PDE grid");
    const double c = solution.value(t, k);
    return discount.discount(t) * f0 * std::exp(-a * (maturity - t)) * c;
}

}  // namespace cfslv::lv
