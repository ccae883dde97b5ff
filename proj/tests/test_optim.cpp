#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "cfslv/errors.hpp"
#include "cfslv/esch.hpp"
#include "cfslv/losses.hpp"
#include "cfslv/subplex.hpp"

using namespace cfslv;
using namespace cfslv::calib;

TEST_CASE("loss_p examples") {
    CHECK(loss_p({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, 2.0) == 0.0);
    CHECK(loss_p({3.0, 4.0}, {0.0, 0.0}, 2.0) == doctest::Approx(5.0));
    CHECK(loss_p({1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, 1.0) == doctest::Approx(3.0));
    CHECK_THROWS_AS(loss_p({1.0}, {1.0, 2.0}, 2.0), DataError);
}

TEST_CASE("loss_p is a norm of the residual vector") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double p = 1.0 + 3.0 * std::generate_canonical<double, 53>(gen);
        std::vector<double> r(6), s(6), zero(6, 0.0);
        for (auto& x : r) x = u(gen);
        for (auto& x : s) x = u(gen);
        const double lam = u(gen);

        // absolute homogeneity: ||lam r|| = |lam| ||r||
        std::vector<double> lr(6);
        for (int i = 0; i < 6; ++i) lr[i] = lam * r[i];
        CHECK(loss_p(lr, zero, p) ==
              doctest::Approx(std::fabs(lam) * loss_p(r, zero, p)).epsilon(1e-10));

        // triangle inequality: ||r + s|| <= ||r|| + ||s||
        std::vector<double> rs(6);
        for (int i = 0; i < 6; ++i) rs[i] = r[i] + s[i];
        CHECK(loss_p(rs, zero, p) <= loss_p(r, zero, p) + loss_p(s, zero, p) + 1e-10);
    }
}

TEST_CASE("normalized loss examples") {
    SUBCASE("model at the snapshot mean scores zero") {
        CHECK(loss_normalized({8.0, 9.0}, {10.0, 11.0}, {9.0, 10.0}, 2.0) == 0.0);
    }
    SUBCASE("model at one endpoint scores 1/2") {
        CHECK(loss_normalized({8.0}, {10.0}, {10.0}, 1.0) == doctest::Approx(0.5));
    }
    SUBCASE("one interval width outside scores 3/2") {
        CHECK(loss_normalized({8.0}, {10.0}, {12.0}, 1.0) == doctest::Approx(1.5));
    }
    SUBCASE("summand below (1/2)^p iff inside the snapshot interval") {
        for (const double model : {8.1, 9.0, 9.9})
            CHECK(loss_normalized({8.0}, {10.0}, {model}, 3.0) < 0.5);
        for (const double model : {7.9, 10.1, 14.0})
            CHECK(loss_normalized({8.0}, {10.0}, {model}, 3.0) > 0.5);
    }
    SUBCASE("degenerate snapshot spread raises DataError naming the quote") {
        CHECK_THROWS_WITH_AS(loss_normalized({8.0, 9.0}, {8.0, 11.0}, {8.0, 10.0}, 2.0),
                             doctest::Contains("0"), DataError);
    }
}

TEST_CASE("esch finds the shifted quadratic minimum") {
    const Objective f = [](const std::vector<double>& x) {
        double acc = 0.0;
        for (const double xi : x) acc += (xi - 0.5) * (xi - 0.5);
        return acc;
    };
    const Bounds bounds{{0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0}};
    EschConfig config;
    config.budget = 5000;
    config.seed = 99;
    const auto result = esch_minimize(f, bounds, config);
    CHECK(result.n_evals <= 5000);
    CHECK(result.value < 1e-2);
}

TEST_CASE("esch invariants") {
    const Bounds bounds{{-1.0, 2.0}, {1.0, 3.0}};

    SUBCASE("never evaluates outside bounds") {
        bool violated = false;
        const Objective f = [&](const std::vector<double>& x) {
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] < bounds.lower[i] - 1e-15 || x[i] > bounds.upper[i] + 1e-15)
                    violated = true;
            return x[0] * x[0] + x[1];
        };
        EschConfig config;
        config.budget = 2000;
        config.seed = 5;
        esch_minimize(f, bounds, config);
        CHECK_FALSE(violated);
    }
    SUBCASE("constant objective returns an in-bounds point with that value") {
        const Objective f = [](const std::vector<double>&) { return 7.25; };
        EschConfig config;
        config.budget = 200;
        const auto result = esch_minimize(f, bounds, config);
        CHECK(result.value == 7.25);
        CHECK(result.x[0] >= -1.0);
        CHECK(result.x[0] <= 1.0);
    }
    SUBCASE("fixed seed reruns are identical") {
        const Objective f = [](const std::vector<double>& x) {
            return std::sin(3.0 * x[0]) + x[1] * x[1];
        };
        EschConfig config;
        config.budget = 1500;
        config.seed = 17;
        const auto r1 = esch_minimize(f, bounds, config);
        const auto r2 = esch_minimize(f, bounds, config);
        CHECK(r1.value == r2.value);
        CHECK(r1.x == r2.x);
        CHECK(r1.n_evals == r2.n_evals);
    }
    SUBCASE("best-so-far trace is non-increasing") {
        const Objective f = [](const std::vector<double>& x) {
            return std::cos(5.0 * x[0]) * x[1];
        };
        EschConfig config;
        config.budget = 1000;
        const auto result = esch_minimize(f, bounds, config);
        for (std::size_t i = 1; i < result.best_trace.size(); ++i)
            CHECK(result.best_trace[i] <= result.best_trace[i - 1]);
    }
    SUBCASE("budget below one generation is rejected") {
        EschConfig config;
        config.budget = 10;
        CHECK_THROWS_AS(esch_minimize([](const std::vector<double>&) { return 0.0; }, bounds,
                                      config),
                        ConfigError);
    }
}

TEST_CASE("subplex reaches the Rosenbrock minimum") {
    const Objective rosenbrock = [](const std::vector<double>& x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    SubplexConfig config;
    config.budget = 10000;
    config.scale = {0.5};
    const auto result = subplex_minimize(rosenbrock, {-1.2, 1.0}, config);
    CHECK(result.value < 1e-6);
    CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(result.x[1] == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("subplex invariants") {
    SUBCASE("already-optimal |x| returns the start") {
        const Objective f = [](const std::vector<double>& x) { return std::fabs(x[0]); };
        SubplexConfig config;
        config.budget = 500;
        const auto result = subplex_minimize(f, {0.0}, config);
        CHECK(result.x[0] == 0.0);
        CHECK(result.value == 0.0);
        CHECK_FALSE(result.improved);
    }
    SUBCASE("partition sizes stay within [nsmin, nsmax] and sum to n") {
        const auto sizes = subplex_partition_sizes(4, 2, 3);
        std::size_t total = 0;
        for (const auto s : sizes) {
            CHECK(s >= 2);
            CHECK(s <= 3);
            total += s;
        }
        CHECK(total == 4);
        // exercised through the optimizer as well
        const Objective f = [](const std::vector<double>& x) {
            double acc = 0.0;
            for (const double xi : x) acc += xi * xi;
            return acc;
        };
        SubplexConfig config;
        config.budget = 2000;
        config.nsmax = 3;
        SubplexTrace trace;
        subplex_minimize(f, {1.0, -2.0, 3.0, -4.0}, config, &trace);
        for (const auto& partition : trace.partitions) {
            std::size_t n = 0;
            for (const auto s : partition) {
                CHECK(s >= 2);
                CHECK(s <= 3);
                n += s;
            }
            CHECK(n == 4);
        }
    }
    SUBCASE("simplex spread strictly decreases on shrink steps") {
        const Objective f = [](const std::vector<double>& x) {
            return std::fabs(x[0]) + 3.0 * std::fabs(std::sin(x[1]));
        };
        SubplexConfig config;
        config.budget = 3000;
        SubplexTrace trace;
        subplex_minimize(f, {2.0, 2.0}, config, &trace);
        for (const double ratio : trace.shrink_spread_ratios) CHECK(ratio < 1.0);
    }
    SUBCASE("per-subspace best never worsens") {
        const Objective f = [](const std::vector<double>& x) {
            return x[0] * x[0] + std::cos(x[1]) + x[2] * x[2] * x[2] * x[2];
        };
        SubplexConfig config;
        config.budget = 4000;
        SubplexTrace trace;
        subplex_minimize(f, {1.0, 0.3, -1.0}, config, &trace);
        for (std::size_t i = 1; i < trace.subspace_best_values.size(); ++i)
            CHECK(trace.subspace_best_values[i] <= trace.subspace_best_values[i - 1] + 1e-15);
    }
    SUBCASE("zero budget evaluates the start once") {
        const Objective f = [](const std::vector<double>& x) { return x[0]; };
        SubplexConfig config;
        config.budget = 0;
        const auto result = subplex_minimize(f, {3.0}, config);
        CHECK(result.x[0] == 3.0);
        CHECK(result.n_evals == 1);
        CHECK_FALSE(result.improved);
    }
}
