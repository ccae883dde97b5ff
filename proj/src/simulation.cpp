#include "cfslv/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cfslv/dupire.hpp"
#include "cfslv/errors.hpp"

namespace cfslv::mc {

namespace {

void reconstruct_prices(const ParticleEnsemble& ensemble, const market::FuturesCurve& curve,
                        std::size_t contract, double t, double a, int threads,
                        std::vector<double>& out) {
    const double f0 = curve.price(contract);
    const double maturity = curve.maturity_time(contract);
    if (maturity < t - 1e-12)
        throw RangeError("contract " + std::to_string(contract) + " already expired at t=" +
                         std::to_string(t));
    const double damp = std::exp(-a * std::max(maturity - t, 0.0));
    const auto& s = ensemble.spot[contract % 2];
    out.resize(s.size());
    parallel_for(s.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out[i] = f0 * (1.0 - (1.0 - s[i]) * damp);
    });
}

}  // namespace

std::vector<double> reconstruct_contract_prices(const DayContext& ctx,
                                                const market::FuturesCurve& curve,
                                                std::size_t contract, double mean_reversion) {
    if (!ctx.ensemble) throw DataError("day context carries no ensemble");
    std::vector<double> out;
    reconstruct_prices(*ctx.ensemble, curve, contract, ctx.t, mean_reversion, 1, out);
    return out;
}

void run_two_factor_simulation(const ModelParams& params, const lv::LocalVolSurface& eta,
                               const market::FuturesCurve& curve,
                               const market::RollSchedule& schedule, const SimConfig& config,
                               const std::vector<DayObserver>& observers) {
    params.validate();
    config.validate();
    // The LV cache quantizes a to 1e-4, so allow that much slack here.
    if (std::fabs(eta.mean_reversion() - params.mean_reversion) > 5e-4)
        throw ParamError("local vol surface was calibrated at a different mean reversion (" +
                         std::to_string(eta.mean_reversion()) + " vs " +
                         std::to_string(params.mean_reversion) + ")");
    if (schedule.max_contract_index() >= curve.size())
        throw RangeError("schedule references contracts beyond the curve");

    const auto& days = schedule.days();
    const Date& valuation = curve.valuation_date();
    if (days.front().date < valuation)
        throw ConfigError("schedule starts before the curve valuation date");

    const CounterRng rng(derive_seed(config.seed, "slv-mc"));
    ParticleEnsemble ensemble = ParticleEnsemble::initial(config.particles, params.v0);

    std::vector<double> front_prices, second_prices;
    const auto notify = [&](std::size_t di, double t) {
        const auto& state = days[di];
        reconstruct_prices(ensemble, curve, state.front, t, params.mean_reversion,
                           config.threads, front_prices);
        reconstruct_prices(ensemble, curve, state.second, t, params.mean_reversion,
                           config.threads, second_prices);
        DayContext ctx;
        ctx.day_index = di;
        ctx.date = state.date;
        ctx.t = t;
        ctx.state = state;
        ctx.front_prices = &front_prices;
        ctx.second_prices = &second_prices;
        ctx.ensemble = &ensemble;
        for (const auto& obs : observers) obs(ctx);
    };

    double t = year_fraction(valuation, days.front().date);
    notify(0, t);
    for (std::size_t di = 1; di < days.size(); ++di) {
        const double t_next = year_fraction(valuation, days[di].date);
        const int sub = config.substeps_per_day;
        const double dt = (t_next - t) / static_cast<double>(sub);
        for (int k = 0; k < sub; ++k)
            step_ensemble(ensemble, eta, t + dt * k, dt, params, config, rng);
        t = t_next;
        notify(di, t);
    }
}

PathSet::PathSet(std::uint64_t seed, std::size_t n_particles, double steps_per_year)
    : seed_(seed), n_particles_(n_particles), steps_per_year_(steps_per_year) {}

void PathSet::append_day(const DayRecord& rec, std::vector<double> front,
                         std::vector<double> second) {
    if (front.size() != n_particles_ || second.size() != n_particles_)
        throw DataError("path set: particle count mismatch");
    records_.push_back(rec);
    front_.push_back(std::move(front));
    second_.push_back(std::move(second));
}

std::size_t PathSet::day_index_of(const Date& d) const {
    for (std::size_t i = 0; i < records_.size(); ++i)
        if (records_[i].date == d) return i;
    throw DataError("date " + d.to_iso() + " not stored in path set");
}

namespace {
constexpr char kPathMagic[4] = {'C', 'F', 'P', 'S'};
constexpr std::uint32_t kPathVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw DataError("path set file truncated");
    return value;
}
}  // namespace

void PathSet::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write path set file '" + path + "'");
    out.write(kPathMagic, 4);
    write_pod(out, kPathVersion);
    write_pod(out, seed_);
    write_pod(out, static_cast<std::uint64_t>(n_particles_));
    write_pod(out, steps_per_year_);
    write_pod(out, static_cast<std::uint64_t>(contracts_.size()));
    for (const auto& row : contracts_) {
        write_pod(out, static_cast<std::uint64_t>(row.index));
        write_pod(out, row.maturity.serial());
        write_pod(out, row.initial_price);
    }
    write_pod(out, static_cast<std::uint64_t>(records_.size()));
    for (const auto& rec : records_) {
        write_pod(out, rec.date.serial());
        write_pod(out, rec.t);
        write_pod(out, static_cast<std::uint64_t>(rec.state.front));
        write_pod(out, static_cast<std::uint64_t>(rec.state.second));
        write_pod(out, rec.state.alpha_eod);
    }
    for (std::size_t d = 0; d < records_.size(); ++d) {
        out.write(reinterpret_cast<const char*>(front_[d].data()),
                  static_cast<std::streamsize>(front_[d].size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(second_[d].data()),
                  static_cast<std::streamsize>(second_[d].size() * sizeof(double)));
    }
    if (!out) throw DataError("short write to path set file '" + path + "'");
}

PathSet PathSet::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open path set file '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kPathMagic, 4) != 0)
        throw DataError("'" + path + "' is not a path set file");
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kPathVersion)
        throw DataError("unsupported path set version " + std::to_string(version));
    const auto seed = read_pod<std::uint64_t>(in);
    const auto n = read_pod<std::uint64_t>(in);
    const auto spy = read_pod<double>(in);
    PathSet ps(seed, n, spy);
    const auto n_contracts = read_pod<std::uint64_t>(in);
    std::vector<ContractRow> contracts(n_contracts);
    for (auto& row : contracts) {
        row.index = read_pod<std::uint64_t>(in);
        row.maturity = Date::from_serial(read_pod<std::int64_t>(in));
        row.initial_price = read_pod<double>(in);
    }
    ps.set_contracts(std::move(contracts));
    const auto n_days = read_pod<std::uint64_t>(in);
    std::vector<DayRecord> records(n_days);
    for (auto& rec : records) {
        rec.date = Date::from_serial(read_pod<std::int64_t>(in));
        rec.t = read_pod<double>(in);
        rec.state.date = rec.date;
        rec.state.front = read_pod<std::uint64_t>(in);
        rec.state.second = read_pod<std::uint64_t>(in);
        rec.state.alpha_eod = read_pod<double>(in);
    }
    for (auto& rec : records) {
        std::vector<double> front(n), second(n);
        in.read(reinterpret_cast<char*>(front.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        in.read(reinterpret_cast<char*>(second.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw DataError("path set file truncated");
        ps.append_day(rec, std::move(front), std::move(second));
    }
    return ps;
}

PathSet simulate_paths(const ModelParams& params, const lv::LocalVolSurface& eta,
                       const market::FuturesCurve& curve, const market::RollSchedule& schedule,
                       const SimConfig& config) {
    const double bytes = static_cast<double>(config.particles) *
                         static_cast<double>(schedule.size()) * 16.0;
    if (bytes > 3.5e9)
        throw ConfigError("path storage would need " + std::to_string(bytes / 1e9) +
                          " GB; reduce particles or use streaming observers");

    // Average business-day frequency including substeps, for provenance.
    const double horizon = year_fraction(schedule.first_date(), schedule.last_date());
    const double spy = horizon > 0.0 ? static_cast<double>(schedule.size() - 1) *
                                           config.substeps_per_day / horizon
                                     : 0.0;
    PathSet ps(config.seed, config.particles, spy);
    std::vector<PathSet::ContractRow> contracts;
    for (std::size_t ci = 0; ci <= schedule.max_contract_index(); ++ci)
        contracts.push_back({ci, curve.maturities()[ci], curve.price(ci)});
    ps.set_contracts(std::move(contracts));
    std::vector<DayObserver> observers;
    observers.push_back([&ps](const DayContext& ctx) {
        ps.append_day({ctx.date, ctx.t, ctx.state}, *ctx.front_prices, *ctx.second_prices);
    });
    run_two_factor_simulation(params, eta, curve, schedule, config, observers);
    return ps;
}

LeverageDiagnostic compute_leverage_diagnostic(const lv::LocalVolSurface& eta, double t,
                                               double maturity, double f0,
                                               const std::vector<double>& factor_spots,
                                               const std::vector<double>& variances, double eps,
                                               const std::vector<double>& strikes) {
    if (factor_spots.empty() || factor_spots.size() != variances.size())
        throw DataError("leverage diagnostic: empty or mismatched snapshot");
    if (!(eps > 0.0)) throw ConfigError("leverage diagnostic: eps must be positive");
    const double a = eta.mean_reversion();
    const double damp = std::exp(-a * (maturity - t));

    LeverageDiagnostic diag;
    diag.strikes = strikes;
    diag.values.assign(strikes.size(), 0.0);
    diag.missing.assign(strikes.size(), false);
    const double inv2e2 = 0.5 / (eps * eps);
    for (std::size_t si = 0; si < strikes.size(); ++si) {
        const double K = strikes[si];
        double wsum = 0.0, vsum = 0.0, wmax = 0.0;
        for (std::size_t i = 0; i < factor_spots.size(); ++i) {
            const double fi = f0 * (1.0 - (1.0 - factor_spots[i]) * damp);
            const double d = fi - K;
            const double w = std::exp(-d * d * inv2e2);
            wsum += w;
            vsum += std::max(variances[i], 0.0) * w;
            wmax = std::max(wmax, w);
        }
        // No particle within ~4 bandwidths: flag as missing.
        if (wmax < std::exp(-8.0) || vsum <= 0.0) {
            diag.missing[si] = true;
            continue;
        }
        const double cond_var = vsum / wsum;
        const double eta_f = lv::local_vol_futures(eta, t, maturity, K, f0);
        diag.values[si] = eta_f / std::sqrt(cond_var);
    }
    return diag;
}

}  // namespace cfslv::mc
