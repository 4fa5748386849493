#include <doctest.h>

#include <cmath>
#include <sstream>

#include "subgeom/convergence.hpp"
#include "subgeom/errors.hpp"

using namespace subgeom;
using harness::ConvergenceCurve;
using harness::ExperimentConfig;

namespace {

nlohmann::json digit_two_start_config(int n_samples) {
    return nlohmann::json{{"experiment", "two_start"},
                          {"model", {{"kind", "digit"}}},
                          {"metric", {{"kind", "euclidean"}}},
                          {"schedule", {1, 2, 3, 4, 5, 6, 7, 8}},
                          {"n_samples", n_samples},
                          {"seed", 42},
                          {"x0", 0.3},
                          {"y0", 0.8}};
}

}  // namespace

TEST_CASE("digit two-start curve is exactly geometric") {
    const auto cfg = ExperimentConfig::from_json(digit_two_start_config(0));
    const auto curve = harness::run_convergence_experiment(cfg);
    REQUIRE(curve.rows.size() == 8);
    for (std::size_t k = 0; k < curve.rows.size(); ++k) {
        const double expected = 0.5 * std::pow(10.0, -static_cast<double>(k + 1));
        CHECK(std::abs(curve.rows[k].distance - expected) <= 1e-12);
        CHECK(curve.rows[k].ci95 == 0.0);
    }
    for (std::size_t k = 1; k < curve.rows.size(); ++k)
        CHECK(std::abs(curve.rows[k].distance / curve.rows[k - 1].distance - 0.1) <= 1e-12);
}

TEST_CASE("sampled two-start curve has zero variance under the shared digits") {
    const auto cfg = ExperimentConfig::from_json(digit_two_start_config(64));
    const auto curve = harness::run_convergence_experiment(cfg);
    for (std::size_t k = 0; k < curve.rows.size(); ++k) {
        const double expected = 0.5 * std::pow(10.0, -static_cast<double>(k + 1));
        CHECK(std::abs(curve.rows[k].distance - expected) <= 1e-12);
        CHECK(curve.rows[k].ci95 <= 1e-15);
    }
}

TEST_CASE("digit chain against the analytic uniform reference") {
    nlohmann::json spec{{"experiment", "vs_reference"},
                        {"model", {{"kind", "digit"}}},
                        {"metric", {{"kind", "euclidean"}}},
                        {"schedule", {1, 2, 3, 4, 5, 6}},
                        {"n_samples", 0},
                        {"seed", 7},
                        {"x0", 0.3}};
    const auto curve = harness::run_convergence_experiment(ExperimentConfig::from_json(spec));
    CHECK(curve.reference == "analytic-uniform01");
    for (std::size_t k = 0; k < curve.rows.size(); ++k) {
        const double scale = std::pow(10.0, -(static_cast<double>(k) + 1.0));
        CHECK(curve.rows[k].distance <= scale + scale / 2.0);
        CHECK(curve.rows[k].distance > 0.0);
    }

    // the sampled estimator with its floor
    spec["n_samples"] = 4000;
    const auto sampled = harness::run_convergence_experiment(ExperimentConfig::from_json(spec));
    CHECK(sampled.sampling_floor > 0.0);
    for (std::size_t k = 0; k < 2; ++k)
        CHECK(sampled.rows[k].distance <=
              std::pow(10.0, -(static_cast<double>(k) + 1.0)) + 3.0 * sampled.sampling_floor);
}

TEST_CASE("rate-constant fit recovers synthetic constants") {
    const auto phi = rates::RateFunction::linear(1.0);
    const double c1 = 2.0, c2 = 0.8, eps = 0.2;
    const rates::RateBoundParams params(c1, c2, eps, 0.0);
    ConvergenceCurve curve;
    curve.reference = "synthetic";
    for (int t = 1; t <= 12; ++t)
        curve.rows.push_back({static_cast<double>(t),
                              rates::rate_bound(phi, params, static_cast<double>(t)), 0.0,
                              std::numeric_limits<double>::quiet_NaN()});
    const auto fit = harness::fit_rate_constants(curve, phi, eps);
    CHECK(fit.residual <= 1e-6);
    CHECK(fit.c1 == doctest::Approx(c1).epsilon(0.01));
    CHECK(fit.c2 == doctest::Approx(c2).epsilon(0.01));

    // the fitted bound dominates the curve it was fit to
    const rates::RateBoundParams fitted(fit.c1, fit.c2, eps, 0.0);
    for (const auto& row : curve.rows)
        CHECK(rates::rate_bound(phi, fitted, row.t) >= row.distance - 1e-9);
}

TEST_CASE("flat curves are rejected as degenerate") {
    ConvergenceCurve curve;
    for (int t = 1; t <= 8; ++t) curve.rows.push_back({static_cast<double>(t), 0.25, 0.0, 0.0});
    CHECK_THROWS_AS(harness::fit_rate_constants(curve, rates::RateFunction::linear(1.0), 0.2),
                    DegenerateFitError);

    ConvergenceCurve tiny;
    tiny.rows.push_back({1.0, 0.5, 0.0, 0.0});
    tiny.rows.push_back({2.0, 0.25, 0.0, 0.0});
    CHECK_THROWS_AS(harness::fit_rate_constants(tiny, rates::RateFunction::linear(1.0), 0.2),
                    std::invalid_argument);
}

TEST_CASE("fitted bound dominates the digit-chain synchronous curve") {
    auto spec = digit_two_start_config(0);
    spec["rate"] = {{"phi", {{"kind", "linear"}, {"lambda", 1.0}}}, {"epsilon", 0.1},
                    {"fit", true}};
    const auto curve =
        harness::run_convergence_experiment(ExperimentConfig::from_json(spec));
    for (const auto& row : curve.rows) {
        CHECK(std::isfinite(row.bound));
        CHECK(row.bound >= row.distance - 3.0 * row.ci95 - 1e-12);
    }
}

TEST_CASE("curves serialize deterministically and round-trip") {
    auto spec = digit_two_start_config(32);
    const auto curve1 =
        harness::run_convergence_experiment(ExperimentConfig::from_json(spec));
    const auto curve2 =
        harness::run_convergence_experiment(ExperimentConfig::from_json(spec));
    std::ostringstream a, b;
    curve1.write_csv(a);
    curve2.write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("# schema: 1") == 0);
    CHECK(a.str().find("t,distance,ci95,bound") != std::string::npos);

    std::istringstream back(a.str());
    const auto parsed = ConvergenceCurve::read_csv(back);
    REQUIRE(parsed.rows.size() == curve1.rows.size());
    for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
        CHECK(parsed.rows[i].t == curve1.rows[i].t);
        CHECK(parsed.rows[i].distance == curve1.rows[i].distance);
    }
}

TEST_CASE("config validation") {
    auto missing_seed = digit_two_start_config(8);
    missing_seed.erase("seed");
    CHECK_THROWS_AS(ExperimentConfig::from_json(missing_seed), std::invalid_argument);

    auto bad_schedule = digit_two_start_config(8);
    bad_schedule["schedule"] = {3, 2, 1};
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad_schedule), std::invalid_argument);

    auto bad_mode = digit_two_start_config(8);
    bad_mode["experiment"] = "sideways";
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad_mode), std::invalid_argument);
}

TEST_CASE("linear regression utility") {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 - 2.0 * v);
    const auto fit = harness::linear_fit(x, y);
    CHECK(fit.intercept == doctest::Approx(3.0));
    CHECK(fit.slope == doctest::Approx(-2.0));
    CHECK(fit.r_squared == doctest::Approx(1.0));

    // a curve linear in t^{1/3} is better explained by t^{1/3} than by t
    std::vector<double> t{1, 2, 4, 8, 12, 16, 20};
    std::vector<double> cube, raw, logd;
    for (double v : t) {
        cube.push_back(std::cbrt(v));
        raw.push_back(v);
        logd.push_back(-1.7 * std::cbrt(v));
    }
    CHECK(harness::linear_fit(cube, logd).r_squared >
          harness::linear_fit(raw, logd).r_squared);
}

TEST_CASE("sdde surrogate-reference experiment reports its floor") {
    nlohmann::json spec{
        {"experiment", "vs_reference"},
        {"model",
         {{"kind", "sdde"},
          {"alpha", 1.0},
          {"kappa", 1.0},
          {"big_m", 1.0},
          {"delay", 1.0},
          {"grid_points", 10},
          {"dt", 0.05},
          {"noise", {{"lo", 0.2}, {"hi", 1.0}}}}},
        {"metric", {{"kind", "sup_segment"}, {"beta", 4.0}}},
        {"schedule", {0.5, 1.0}},
        {"n_samples", 32},
        {"seed", 23},
        {"x0", 1.0}};
    const auto curve =
        harness::run_convergence_experiment(harness::ExperimentConfig::from_json(spec));
    CHECK(curve.reference == "surrogate");
    CHECK(curve.surrogate_warning);
    CHECK(curve.sampling_floor > 0.0);
    REQUIRE(curve.rows.size() == 2);
    for (const auto& row : curve.rows) CHECK(row.distance >= 0.0);

    std::ostringstream csv;
    curve.write_csv(csv);
    CHECK(csv.str().find("surrogate") != std::string::npos);
}

TEST_CASE("sdde two-start experiment is reproducible") {
    nlohmann::json spec{
        {"experiment", "two_start"},
        {"model",
         {{"kind", "sdde"},
          {"alpha", 1.0},
          {"kappa", 1.0},
          {"big_m", 1.0},
          {"delay", 1.0},
          {"grid_points", 20},
          {"dt", 0.05},
          {"noise", {{"lo", 0.2}, {"hi", 1.0}}}}},
        {"metric", {{"kind", "sup_segment"}, {"beta", 4.0}}},
        {"schedule", {0.5, 1.0, 2.0}},
        {"n_samples", 48},
        {"seed", 17},
        {"x0", 2.0},
        {"y0", -2.0}};
    const auto cfg = ExperimentConfig::from_json(spec);
    const auto curve1 = harness::run_convergence_experiment(cfg);
    const auto curve2 = harness::run_convergence_experiment(cfg);
    REQUIRE(curve1.rows.size() == 3);
    for (std::size_t i = 0; i < curve1.rows.size(); ++i) {
        CHECK(curve1.rows[i].distance == curve2.rows[i].distance);
        CHECK(curve1.rows[i].ci95 == curve2.rows[i].ci95);
        CHECK(curve1.rows[i].distance >= 0.0);
        CHECK(curve1.rows[i].distance <= 1.0);
    }
}
