#include <doctest.h>

#include "subgeom/convergence.hpp"
#include "subgeom/drift.hpp"
#include "subgeom/models.hpp"
#include "subgeom/transport.hpp"

// The OpenMP kernels must reproduce the serial reference bit for bit: every
// sample owns a stream derived from (seed, index) and reductions happen in
// index order.

using namespace subgeom;

TEST_CASE("discrete marginal sampling: parallel equals serial") {
    const auto model = chains::make_digit_chain();
    const auto par = chains::sample_marginal(model, 0.37, 12, 5000, 91, Exec::Parallel);
    const auto ser = chains::sample_marginal(model, 0.37, 12, 5000, 91, Exec::Serial);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) CHECK(par.scalar(i) == ser.scalar(i));
}

TEST_CASE("sdde marginal sampling: parallel equals serial") {
    chains::VkDriftParams params{1.0, 1.0, 1.0, 1, nullptr};
    chains::BoundedNoiseParams noise{0.2, 1.0, 1.0};
    auto spec = chains::delayed_noise_sdde(params, noise);
    const chains::SegmentGrid grid(1.0, 10);
    chains::ContinuousModel model{"sdde", spec, grid, 0.05, nullptr};
    const auto x0 = chains::SegmentState::constant_scalar(grid, 1.0);

    const auto par = chains::sample_marginal(model, x0, 1.0, 400, 93,
                                             chains::SddeObservable::Segment, Exec::Parallel);
    const auto ser = chains::sample_marginal(model, x0, 1.0, 400, 93,
                                             chains::SddeObservable::Segment, Exec::Serial);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) CHECK(par.point(i) == ser.point(i));
}

TEST_CASE("coupling bound estimator: parallel equals serial") {
    auto sampler = [](Rng& rng) {
        const double shared = rng.normal();
        return std::make_pair(transport::Point{shared + rng.uniform01()},
                              transport::Point{shared});
    };
    const auto par = transport::coupling_upper_bound(sampler, transport::Metric::euclidean(),
                                                     20000, 95, Exec::Parallel);
    const auto ser = transport::coupling_upper_bound(sampler, transport::Metric::euclidean(),
                                                     20000, 95, Exec::Serial);
    CHECK(par.mean == ser.mean);
    CHECK(par.ci95 == ser.ci95);
}

TEST_CASE("drift checker: parallel equals serial") {
    auto model = chains::make_digit_chain();
    model.lyapunov = [](double x) { return x; };
    const auto phi = rates::RateFunction::linear(0.9);
    const std::vector<double> states{0.2, 0.8};
    const auto par =
        lyapunov::check_drift_discrete(model, phi, 0.45, states, 4000, 97, Exec::Parallel);
    const auto ser =
        lyapunov::check_drift_discrete(model, phi, 0.45, states, 4000, 97, Exec::Serial);
    for (std::size_t i = 0; i < par.rows.size(); ++i) {
        CHECK(par.rows[i].pv_estimate == ser.rows[i].pv_estimate);
        CHECK(par.rows[i].margin == ser.rows[i].margin);
        CHECK(par.rows[i].ci95 == ser.rows[i].ci95);
    }
}

TEST_CASE("two-start experiments: parallel equals serial") {
    nlohmann::json spec{{"experiment", "two_start"},
                        {"model", {{"kind", "digit"}}},
                        {"metric", {{"kind", "euclidean"}}},
                        {"schedule", {1, 2, 3}},
                        {"n_samples", 256},
                        {"seed", 99},
                        {"x0", 0.25},
                        {"y0", 0.75}};
    auto cfg = harness::ExperimentConfig::from_json(spec);
    cfg.exec = Exec::Parallel;
    const auto par = harness::run_convergence_experiment(cfg);
    cfg.exec = Exec::Serial;
    const auto ser = harness::run_convergence_experiment(cfg);
    for (std::size_t i = 0; i < par.rows.size(); ++i) {
        CHECK(par.rows[i].distance == ser.rows[i].distance);
        CHECK(par.rows[i].ci95 == ser.rows[i].ci95);
    }
}
