#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfslv/black76.hpp"
#include "cfslv/dates.hpp"
#include "cfslv/dupire.hpp"
#include "cfslv/errors.hpp"
#include "cfslv/esch.hpp"
#include "cfslv/hybrid_calibration.hpp"
#include "cfslv/index_engine.hpp"
#include "cfslv/index_pricing.hpp"
#include "cfslv/local_vol.hpp"
#include "cfslv/losses.hpp"
#include "cfslv/lv_calibration.hpp"
#include "cfslv/market_data.hpp"
#include "cfslv/model_params.hpp"
#include "cfslv/roll_schedule.hpp"
#include "cfslv/simulation.hpp"
#include "cfslv/subplex.hpp"

namespace py = pybind11;
using namespace cfslv;

namespace {

Date parse_date(const std::string& iso) { return Date::from_iso(iso); }

market::FuturesCurve make_curve(const std::string& valuation,
                                const std::vector<std::string>& maturities,
                                const std::vector<double>& prices) {
    std::vector<Date> dates;
    dates.reserve(maturities.size());
    for (const auto& m : maturities) dates.push_back(parse_date(m));
    return market::FuturesCurve(parse_date(valuation), std::move(dates), prices);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Commodity futures SLV pricing and GSCI index calibration";

    py::register_exception<DataError>(m, "DataError");
    py::register_exception<RangeError>(m, "RangeErrorCf");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ParamError>(m, "ParamError");
    py::register_exception<DomainError>(m, "DomainErrorCf");
    py::register_exception<CalendarError>(m, "CalendarError");
    py::register_exception<NumericsError>(m, "NumericsError");
    py::register_exception<CalibrationError>(m, "CalibrationError");

    // ---- pricing utilities ----
    py::enum_<pricing::OptionType>(m, "OptionType")
        .value("CALL", pricing::OptionType::Call)
        .value("PUT", pricing::OptionType::Put);
    m.def("black_price", &pricing::black_price, py::arg("forward"), py::arg("strike"),
          py::arg("expiry"), py::arg("sigma"), py::arg("df") = 1.0,
          py::arg("option_type") = pricing::OptionType::Call);
    m.def("implied_vol", &pricing::implied_vol, py::arg("price"), py::arg("forward"),
          py::arg("strike"), py::arg("expiry"), py::arg("df") = 1.0,
          py::arg("option_type") = pricing::OptionType::Call);

    // ---- market data ----
    py::class_<market::FuturesCurve>(m, "FuturesCurve")
        .def(py::init(&make_curve), py::arg("valuation_date"), py::arg("maturities"),
             py::arg("prices"))
        .def("price", &market::FuturesCurve::price)
        .def("maturity_time", &market::FuturesCurve::maturity_time)
        .def("__len__", &market::FuturesCurve::size);
    py::class_<market::DiscountCurve>(m, "DiscountCurve")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("times"),
             py::arg("discounts"))
        .def_static("flat", &market::DiscountCurve::flat, py::arg("rate"),
                    py::arg("horizon") = 50.0)
        .def("discount", &market::DiscountCurve::discount);

    py::enum_<market::QuoteKind>(m, "QuoteKind")
        .value("ON_FUTURES", market::QuoteKind::OnFutures)
        .value("ON_INDEX", market::QuoteKind::OnIndex);
    py::enum_<market::QuoteUnit>(m, "QuoteUnit")
        .value("PRICE", market::QuoteUnit::Price)
        .value("IMPLIED_VOL", market::QuoteUnit::ImpliedVol);
    py::class_<market::VanillaQuote>(m, "VanillaQuote")
        .def(py::init([](market::QuoteKind kind, double expiry, const std::string& underlying,
                         double strike_or_moneyness, market::QuoteUnit unit, double value,
                         const std::string& quote_date) {
                 market::VanillaQuote q;
                 q.kind = kind;
                 q.expiry = expiry;
                 if (!underlying.empty()) q.underlying = parse_date(underlying);
                 q.strike_or_moneyness = strike_or_moneyness;
                 q.unit = unit;
                 q.value = value;
                 q.quote_date = parse_date(quote_date);
                 return q;
             }),
             py::arg("kind"), py::arg("expiry"), py::arg("underlying"),
             py::arg("strike_or_moneyness"), py::arg("unit"), py::arg("value"),
             py::arg("quote_date"))
        .def_readwrite("expiry", &market::VanillaQuote::expiry)
        .def_readwrite("strike_or_moneyness", &market::VanillaQuote::strike_or_moneyness)
        .def_readwrite("value", &market::VanillaQuote::value);
    py::class_<market::QuoteSet>(m, "QuoteSet")
        .def(py::init<>())
        .def(py::init([](std::vector<market::VanillaQuote> quotes) {
                 market::QuoteSet s;
                 s.quotes = std::move(quotes);
                 return s;
             }),
             py::arg("quotes"))
        .def_readwrite("quotes", &market::QuoteSet::quotes)
        .def("__len__", &market::QuoteSet::size);
    m.def("load_quotes",
          [](const std::string& path, const std::string& valuation) {
              return market::load_quotes(path, parse_date(valuation));
          });
    m.def("load_futures_curve", [](const std::string& path, const std::string& valuation) {
        return market::load_futures_curve(path, parse_date(valuation));
    });
    m.def("load_discount_curve", &market::load_discount_curve);

    py::class_<Calendar>(m, "Calendar")
        .def(py::init<>())
        .def("is_business_day",
             [](const Calendar& c, const std::string& d) {
                 return c.is_business_day(parse_date(d));
             });

    py::class_<market::RollDay>(m, "RollDay")
        .def_property_readonly("date",
                               [](const market::RollDay& d) { return d.date.to_iso(); })
        .def_readonly("front", &market::RollDay::front)
        .def_readonly("second", &market::RollDay::second)
        .def_readonly("alpha_eod", &market::RollDay::alpha_eod);
    py::class_<market::RollSchedule>(m, "RollSchedule")
        .def("__len__", &market::RollSchedule::size)
        .def("day", &market::RollSchedule::at, py::return_value_policy::reference_internal);
    m.def(
        "build_roll_schedule",
        [](const Calendar& cal, const market::FuturesCurve& curve, const std::string& start,
           const std::string& end) {
            return market::build_roll_schedule(cal, curve, parse_date(start), parse_date(end));
        },
        py::arg("calendar"), py::arg("curve"), py::arg("start"), py::arg("end"));

    // ---- local vol and the extended Dupire solver ----
    py::class_<lv::LocalVolSurface>(m, "LocalVolSurface")
        .def(py::init<double, std::vector<double>, std::vector<double>,
                      std::vector<std::vector<double>>, double>(),
             py::arg("mean_reversion"), py::arg("time_knots"), py::arg("strike_knots"),
             py::arg("values"), py::arg("cap") = 5.0)
        .def_static("flat", &lv::LocalVolSurface::flat, py::arg("eta"),
                    py::arg("mean_reversion"))
        .def("value", &lv::LocalVolSurface::value)
        .def("to_json", &lv::LocalVolSurface::to_json)
        .def_static("from_json", &lv::LocalVolSurface::from_json)
        .def_property_readonly("mean_reversion", &lv::LocalVolSurface::mean_reversion)
        .def_property_readonly("time_knots", &lv::LocalVolSurface::time_knots)
        .def_property_readonly("strike_knots", &lv::LocalVolSurface::strike_knots)
        .def_property_readonly("values", &lv::LocalVolSurface::values);

    m.def("effective_strike", &lv::effective_strike, py::arg("t"), py::arg("maturity"),
          py::arg("strike"), py::arg("f0"), py::arg("a"));
    m.def("futures_from_spot", &lv::futures_from_spot, py::arg("s"), py::arg("t"),
          py::arg("maturity"), py::arg("f0"), py::arg("a"));
    m.def("local_vol_futures", &lv::local_vol_futures);

    py::class_<lv::PdeGridSpec>(m, "PdeGridSpec")
        .def(py::init<>())
        .def_readwrite("k_min", &lv::PdeGridSpec::k_min)
        .def_readwrite("k_max", &lv::PdeGridSpec::k_max)
        .def_readwrite("k_cells", &lv::PdeGridSpec::k_cells)
        .def_readwrite("steps_per_year", &lv::PdeGridSpec::steps_per_year)
        .def_readwrite("horizon", &lv::PdeGridSpec::horizon)
        .def_readwrite("mandatory_times", &lv::PdeGridSpec::mandatory_times);
    py::class_<lv::NormalizedCallGrid>(m, "NormalizedCallGrid")
        .def("value", &lv::NormalizedCallGrid::value)
        .def_property_readonly("times", &lv::NormalizedCallGrid::times)
        .def_property_readonly("strikes", &lv::NormalizedCallGrid::strikes);
    m.def("solve_normalized_calls", &lv::solve_normalized_calls, py::arg("eta"),
          py::arg("mean_reversion"), py::arg("grid"));
    m.def("vanilla_price_on_futures", &lv::vanilla_price_on_futures, py::arg("solution"),
          py::arg("t"), py::arg("maturity"), py::arg("strike"), py::arg("f0"),
          py::arg("discount"), py::arg("allow_low_extrapolation") = true);

    py::class_<lv::LvCalibrationConfig>(m, "LvCalibrationConfig")
        .def(py::init<>())
        .def_readwrite("strike_knots", &lv::LvCalibrationConfig::strike_knots)
        .def_readwrite("budget_per_slab", &lv::LvCalibrationConfig::budget_per_slab)
        .def_readwrite("grid", &lv::LvCalibrationConfig::grid);
    py::class_<lv::LvCalibrationResult>(m, "LvCalibrationResult")
        .def_readonly("surface", &lv::LvCalibrationResult::surface)
        .def_readonly("residuals", &lv::LvCalibrationResult::residuals)
        .def_readonly("max_rel_residual", &lv::LvCalibrationResult::max_rel_residual)
        .def_readonly("n_objective_evals", &lv::LvCalibrationResult::n_objective_evals)
        .def_readonly("n_pde_solves", &lv::LvCalibrationResult::n_pde_solves);
    m.def("calibrate_local_vol", &lv::calibrate_local_vol, py::arg("quotes"), py::arg("curve"),
          py::arg("discount"), py::arg("mean_reversion"),
          py::arg("config") = lv::LvCalibrationConfig{});

    // ---- two-factor SLV Monte Carlo ----
    py::class_<mc::PiecewiseCorrelation>(m, "PiecewiseCorrelation")
        .def(py::init<double>())
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("times"),
             py::arg("values"))
        .def("at", &mc::PiecewiseCorrelation::at);
    py::class_<mc::ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("mean_reversion", &mc::ModelParams::mean_reversion)
        .def_readwrite("kappa", &mc::ModelParams::kappa)
        .def_readwrite("theta", &mc::ModelParams::theta)
        .def_readwrite("vol_of_vol", &mc::ModelParams::vol_of_vol)
        .def_readwrite("rho_spot_var", &mc::ModelParams::rho_spot_var)
        .def_readwrite("v0", &mc::ModelParams::v0)
        .def_readwrite("rho_front_second", &mc::ModelParams::rho_front_second)
        .def("validate", &mc::ModelParams::validate);
    py::class_<mc::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("particles", &mc::SimConfig::particles)
        .def_readwrite("substeps_per_day", &mc::SimConfig::substeps_per_day)
        .def_readwrite("mollifier_bandwidth", &mc::SimConfig::mollifier_bandwidth)
        .def_readwrite("seed", &mc::SimConfig::seed)
        .def_readwrite("bins", &mc::SimConfig::bins)
        .def_readwrite("antithetic", &mc::SimConfig::antithetic)
        .def_readwrite("threads", &mc::SimConfig::threads)
        .def_readwrite("leverage_lv_only", &mc::SimConfig::leverage_lv_only);

    py::class_<mc::PathSet>(m, "PathSet")
        .def_property_readonly("days", &mc::PathSet::days)
        .def_property_readonly("particles", &mc::PathSet::particles)
        .def_property_readonly("seed", &mc::PathSet::seed)
        .def("front", &mc::PathSet::front, py::return_value_policy::reference_internal)
        .def("second", &mc::PathSet::second, py::return_value_policy::reference_internal)
        .def("state",
             [](const mc::PathSet& p, std::size_t day) { return p.record(day).state; })
        .def("time", [](const mc::PathSet& p, std::size_t day) { return p.record(day).t; })
        .def("save", &mc::PathSet::save)
        .def_static("load", &mc::PathSet::load);
    m.def("simulate_paths", &mc::simulate_paths, py::arg("params"), py::arg("eta"),
          py::arg("curve"), py::arg("schedule"), py::arg("config"));

    // ---- index engine ----
    m.def("index_step_nonroll", &gsci::index_step_nonroll);
    m.def("index_step_roll", &gsci::index_step_roll);
    m.def("index_quantity", &gsci::index_quantity);
    py::class_<gsci::IndexPaths>(m, "IndexPaths")
        .def_readonly("times", &gsci::IndexPaths::times)
        .def_readonly("values", &gsci::IndexPaths::values)
        .def_property_readonly("dates", [](const gsci::IndexPaths& p) {
            std::vector<std::string> out;
            for (const auto& d : p.dates) out.push_back(d.to_iso());
            return out;
        });
    m.def("replicate_index", &gsci::replicate_index, py::arg("paths"), py::arg("schedule"),
          py::arg("initial_value"));

    py::class_<pricing::PricedOption>(m, "PricedOption")
        .def_readonly("price", &pricing::PricedOption::price)
        .def_readonly("std_error", &pricing::PricedOption::std_error)
        .def_readonly("implied_vol", &pricing::PricedOption::implied_vol);
    m.def("price_vanilla_from_samples", &pricing::price_vanilla_from_samples,
          py::arg("terminal"), py::arg("forward_ref"), py::arg("expiry"), py::arg("strike"),
          py::arg("df") = 1.0, py::arg("option_type") = pricing::OptionType::Call);

    // ---- calibration toolkit ----
    m.def("loss_p", &calib::loss_p, py::arg("market"), py::arg("model"), py::arg("p"));
    m.def("loss_normalized", &calib::loss_normalized, py::arg("nov"), py::arg("dec"),
          py::arg("model"), py::arg("p"), py::arg("denominator_floor_rel") = 1e-4);

    py::class_<calib::OptimResult>(m, "OptimResult")
        .def_readonly("x", &calib::OptimResult::x)
        .def_readonly("value", &calib::OptimResult::value)
        .def_readonly("n_evals", &calib::OptimResult::n_evals)
        .def_readonly("improved", &calib::OptimResult::improved);
    m.def(
        "esch_minimize",
        [](const calib::Objective& f, const std::vector<double>& lower,
           const std::vector<double>& upper, std::size_t budget, std::uint64_t seed,
           std::size_t parents, std::size_t offspring) {
            calib::EschConfig config;
            config.budget = budget;
            config.seed = seed;
            config.parents = parents;
            config.offspring = offspring;
            return calib::esch_minimize(f, calib::Bounds{lower, upper}, config);
        },
        py::arg("f"), py::arg("lower"), py::arg("upper"), py::arg("budget") = 2000,
        py::arg("seed") = 0, py::arg("parents") = 20, py::arg("offspring") = 40);
    m.def(
        "subplex_minimize",
        [](const calib::Objective& f, const std::vector<double>& x0, std::size_t budget,
           double scale) {
            calib::SubplexConfig config;
            config.budget = budget;
            config.scale = {scale};
            return calib::subplex_minimize(f, x0, config);
        },
        py::arg("f"), py::arg("x0"), py::arg("budget") = 5000, py::arg("scale") = 0.1);

    py::class_<calib::CalibrationReport>(m, "CalibrationReport")
        .def_property_readonly("params",
                               [](const calib::CalibrationReport& r) {
                                   return r.calibrated.to_vector();
                               })
        .def_readonly("loss_p0", &calib::CalibrationReport::loss_p0)
        .def_readonly("loss_p1", &calib::CalibrationReport::loss_p1)
        .def_readonly("loss_p2", &calib::CalibrationReport::loss_p2)
        .def_readonly("n_evals", &calib::CalibrationReport::n_evals)
        .def("to_json", &calib::CalibrationReport::to_json);
    m.def(
        "hybrid_calibrate",
        [](const calib::Objective& f, const std::vector<double>& lower,
           const std::vector<double>& upper, std::size_t global_budget,
           std::size_t local_budget, std::uint64_t seed,
           const std::vector<double>& initial_point, bool warm_start, std::size_t parents,
           std::size_t offspring) {
            calib::HybridConfig config;
            config.bounds = calib::Bounds{lower, upper};
            config.global_budget = global_budget;
            config.local_budget = local_budget;
            config.seed = seed;
            config.initial_point = initial_point;
            config.warm_start = warm_start;
            config.esch.parents = parents;
            config.esch.offspring = offspring;
            return calib::hybrid_calibrate(f, config);
        },
        py::arg("f"), py::arg("lower"), py::arg("upper"), py::arg("global_budget") = 300,
        py::arg("local_budget") = 200, py::arg("seed") = 42,
        py::arg("initial_point") = std::vector<double>{}, py::arg("warm_start") = false,
        py::arg("parents") = 20, py::arg("offspring") = 40);
}
