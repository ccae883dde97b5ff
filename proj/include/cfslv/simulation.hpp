#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfslv/local_vol.hpp"
#include "cfslv/market_data.hpp"
#include "cfslv/model_params.hpp"
#include "cfslv/particles.hpp"
#include "cfslv/roll_schedule.hpp"

namespace cfslv::mc {

// One observed business day. Price vectors hold the reconstructed futures
// prices of that day's front and second contracts for every particle.
struct DayContext {
    std::size_t day_index = 0;
    Date date;
    double t = 0.0;  // ACT/365 from valuation
    market::RollDay state;
    const std::vector<double>* front_prices = nullptr;
    const std::vector<double>* second_prices = nullptr;
    const ParticleEnsemble* ensemble = nullptr;
};

using DayObserver = std::function<void(const DayContext&)>;

// Reconstructed prices of an arbitrary curve contract from the ensemble in a
// day context (factor chosen by contract parity).
std::vector<double> reconstruct_contract_prices(const DayContext& ctx,
                                                const market::FuturesCurve& curve,
                                                std::size_t contract, double mean_reversion);

// Runs the two-factor SLV particle simulation over the schedule's business
// days (valuation day included as day 0) and feeds every day to the
// observers. Contract i is driven by factor i mod 2, and prices follow
// F(T_i) = F_0(T_i) (1 - (1 - s^x) e^{-a (T_i - t)}).
void run_two_factor_simulation(const ModelParams& params, const lv::LocalVolSurface& eta,
                               const market::FuturesCurve& curve,
                               const market::RollSchedule& schedule, const SimConfig& config,
                               const std::vector<DayObserver>& observers);

// Stored daily paths of the rolling-window contracts.
class PathSet {
public:
    struct DayRecord {
        Date date;
        double t = 0.0;
        market::RollDay state;
    };
    // Contract table entry: curve index, maturity date and initial price, so
    // a persisted file is self-contained.
    struct ContractRow {
        std::size_t index = 0;
        Date maturity;
        double initial_price = 0.0;
    };

    PathSet(std::uint64_t seed, std::size_t n_particles, double steps_per_year);

    void set_contracts(std::vector<ContractRow> contracts) { contracts_ = std::move(contracts); }
    const std::vector<ContractRow>& contracts() const { return contracts_; }

    void append_day(const DayRecord& rec, std::vector<double> front, std::vector<double> second);

    std::uint64_t seed() const { return seed_; }
    std::size_t particles() const { return n_particles_; }
    double steps_per_year() const { return steps_per_year_; }
    std::size_t days() const { return records_.size(); }
    const DayRecord& record(std::size_t day) const { return records_[day]; }

    // Prices on stored day `day` of that day's front/second contract.
    const std::vector<double>& front(std::size_t day) const { return front_[day]; }
    const std::vector<double>& second(std::size_t day) const { return second_[day]; }

    std::size_t day_index_of(const Date& d) const;  // throws DataError if absent

    // Versioned little-endian columnar file ("CFPS" magic). Layout documented
    // in the README.
    void save(const std::string& path) const;
    static PathSet load(const std::string& path);

private:
    std::uint64_t seed_;
    std::size_t n_particles_;
    double steps_per_year_;
    std::vector<ContractRow> contracts_;
    std::vector<DayRecord> records_;
    std::vector<std::vector<double>> front_;
    std::vector<std::vector<double>> second_;
};

// Simulation with full path storage (memory permitting: N * days * 16 bytes).
PathSet simulate_paths(const ModelParams& params, const lv::LocalVolSurface& eta,
                       const market::FuturesCurve& curve, const market::RollSchedule& schedule,
                       const SimConfig& config);

// Mean/stderr accumulator for futures vanilla prices at a fixed expiry day:
// one entry per strike; price = df * mean((F_T - K)^+).
struct VanillaSnapshotSpec {
    Date expiry_date;
    std::size_t contract = 0;  // curve contract index
    std::vector<double> strikes;
};

struct VanillaSnapshotResult {
    double expiry_time = 0.0;
    double forward = 0.0;                  // particle mean of F at expiry
    std::vector<double> prices;            // undiscounted payoff means
    std::vector<double> stderrs;
};

// Gyongy-style diagnostic: leverage L(t,T,K) = eta_F(t,T,K) / sqrt(E[v|F=K])
// from an ensemble snapshot; entries with empty kernel support are missing.
struct LeverageDiagnostic {
    std::vector<double> strikes;
    std::vector<double> values;
    std::vector<bool> missing;
};

LeverageDiagnostic compute_leverage_diagnostic(const lv::LocalVolSurface& eta, double t,
                                               double maturity, double f0,
                                               const std::vector<double>& factor_spots,
                                               const std::vector<double>& variances, double eps,
                                               const std::vector<double>& strikes);

}  // namespace cfslv::mc
