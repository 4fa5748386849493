#include <doctest.h>

#include <cmath>

#include "subgeom/errors.hpp"
#include "subgeom/models.hpp"
#include "subgeom/parallel.hpp"
#include "subgeom/sdde.hpp"

using namespace subgeom;
using chains::SegmentGrid;
using chains::SegmentState;
using chains::SegmentView;

namespace {

chains::SddeSpec deterministic_spec(std::function<std::vector<double>(const SegmentView&)> f) {
    chains::SddeSpec spec;
    spec.dim = 1;
    spec.wiener_dim = 1;
    spec.drift = std::move(f);
    spec.diffusion = [](const SegmentView&) { return std::vector<double>{0.0}; };
    return spec;
}

}  // namespace

TEST_CASE("segments and views") {
    const SegmentGrid grid(1.0, 4);
    CHECK(grid.dt() == doctest::Approx(0.25));
    const auto seg = SegmentState(grid, 1, {0.0, 1.0, 2.0, 3.0, 4.0});
    CHECK(seg.current_scalar() == 4.0);
    CHECK(seg.scalar_at(0) == 0.0);

    const SegmentView view{seg.values().data(), grid.points(), 1, grid.dt()};
    CHECK(view.back() == 4.0);
    CHECK(view.front() == 0.0);
    CHECK(view.at_lag(0.0) == doctest::Approx(4.0));
    CHECK(view.at_lag(-1.0) == doctest::Approx(0.0));
    CHECK(view.at_lag(-0.375) == doctest::Approx(2.5));  // linear interpolation
    CHECK(view.sup_norm() == doctest::Approx(4.0));

    const auto other = SegmentState::constant_scalar(grid, 1.0);
    CHECK(seg.sup_distance(other) == doctest::Approx(3.0));

    CHECK_THROWS_AS(SegmentGrid(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(SegmentState(grid, 1, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("zero coefficients keep the path constant") {
    const SegmentGrid grid(1.0, 10);
    const auto x0 = SegmentState::constant_scalar(grid, 0.7);
    auto spec = deterministic_spec([](const SegmentView&) { return std::vector<double>{0.0}; });
    Rng rng(3);
    const auto end = chains::sdde_integrate(spec, x0, 2.0, 0.05, rng);
    for (int i = 0; i <= grid.m; ++i) CHECK(end.scalar_at(i) == doctest::Approx(0.7));
}

TEST_CASE("deterministic linear drift matches the Euler product") {
    const SegmentGrid grid(1.0, 10);
    const auto x0 = SegmentState::constant_scalar(grid, 1.0);
    auto spec = deterministic_spec(
        [](const SegmentView& seg) { return std::vector<double>{-seg.back()}; });

    for (double dt : {0.1, 0.01, 0.002}) {
        Rng rng(4);
        const auto end = chains::sdde_integrate(spec, x0, 1.0, dt, rng);
        const double expected = std::pow(1.0 - dt, 1.0 / dt);
        CHECK(end.current_scalar() == doctest::Approx(expected).epsilon(1e-12));
        CHECK(std::abs(end.current_scalar() - std::exp(-1.0)) <= dt);
    }
}

TEST_CASE("integration preconditions") {
    const SegmentGrid grid(1.0, 10);
    const auto x0 = SegmentState::constant_scalar(grid, 1.0);
    auto spec = deterministic_spec([](const SegmentView&) { return std::vector<double>{0.0}; });
    Rng rng(5);
    CHECK_THROWS_AS(chains::sdde_integrate(spec, x0, 1.0, 0.15, rng), std::invalid_argument);
    CHECK_THROWS_AS(chains::sdde_integrate(spec, x0, 1.03, 0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(chains::sdde_integrate(spec, x0, -1.0, 0.1, rng), std::invalid_argument);
}

TEST_CASE("unstable specs trip the blow-up guard") {
    const SegmentGrid grid(1.0, 4);
    const auto x0 = SegmentState::constant_scalar(grid, 10.0);
    auto spec = deterministic_spec([](const SegmentView& seg) {
        const double v = seg.back();
        return std::vector<double>{v * v * v};
    });
    Rng rng(6);
    CHECK_THROWS_AS(chains::sdde_integrate(spec, x0, 20.0, 0.25, rng), BlowUpError);
}

TEST_CASE("radial drift preset satisfies its inner-product condition") {
    chains::VkDriftParams params{1.0, 1.0, 1.0, 1, nullptr};
    auto spec =
        chains::vk_drift(params, [](const SegmentView&) { return std::vector<double>{1.0}; });

    // <f(x), x(0)> = -|x(0)| for |x(0)| >= M when alpha = 1, kappa = 1
    const SegmentGrid grid(1.0, 4);
    for (double v : {1.0, 1.5, -2.0, 7.0}) {
        const auto seg = SegmentState::constant_scalar(grid, v);
        const SegmentView view{seg.values().data(), grid.points(), 1, grid.dt()};
        const auto f = spec.drift(view);
        CHECK(f[0] * v == doctest::Approx(-std::abs(v)).epsilon(1e-12));
    }

    // the property-scale sampling check
    const double violation = chains::vk_condition_violation(spec, grid, 1.0, 1.0, 1.0, 10000, 123);
    CHECK(violation <= 1e-12);

    // alpha = 0.5 with its interior linearization
    chains::VkDriftParams half{2.0, 0.5, 1.5, 1, nullptr};
    auto spec_half =
        chains::vk_drift(half, [](const SegmentView&) { return std::vector<double>{1.0}; });
    CHECK(chains::vk_condition_violation(spec_half, grid, 2.0, 0.5, 1.5, 10000, 321) <= 1e-12);

    // a large outward perturbation must be rejected at construction
    chains::VkDriftParams broken{1.0, 1.0, 1.0, 1,
                                 [](const SegmentView&) { return std::vector<double>{5.0}; }};
    CHECK_THROWS_AS(
        chains::vk_drift(broken, [](const SegmentView&) { return std::vector<double>{1.0}; }),
        std::invalid_argument);
}

TEST_CASE("delayed_noise_sdde noise amplitude is increasing, bounded and positive") {
    chains::VkDriftParams params{1.0, 1.0, 1.0, 1, nullptr};
    chains::BoundedNoiseParams noise{0.2, 1.0, 1.0};
    auto spec = chains::delayed_noise_sdde(params, noise);

    const SegmentGrid grid(1.0, 4);
    double prev = 0.0;
    for (double delayed : {-20.0, -2.0, 0.0, 2.0, 20.0}) {
        std::vector<double> values(static_cast<std::size_t>(grid.points()), 0.5);
        values[0] = delayed;  // value at lag -r
        const SegmentState seg(grid, 1, std::move(values));
        const SegmentView view{seg.values().data(), grid.points(), 1, grid.dt()};
        const double g = spec.diffusion(view)[0];
        CHECK(g > 0.2 - 1e-12);
        CHECK(g < 1.0 + 1e-12);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("Ornstein-Uhlenbeck moments match the closed forms") {
    // dX = -X dt + dW as a delay equation with no delay dependence
    chains::SddeSpec spec;
    spec.dim = 1;
    spec.wiener_dim = 1;
    spec.drift = [](const SegmentView& seg) { return std::vector<double>{-seg.back()}; };
    spec.diffusion = [](const SegmentView&) { return std::vector<double>{1.0}; };

    const SegmentGrid grid(1.0, 10);
    const double x0 = 2.0, t = 1.0, dt = 0.002;
    const int n = 20000;
    chains::ContinuousModel model{"ou", spec, grid, dt, nullptr};
    const auto marginal =
        chains::sample_marginal(model, SegmentState::constant_scalar(grid, x0), t, n, 2024,
                               chains::SddeObservable::CurrentValue);

    double mean = 0.0;
    for (std::size_t i = 0; i < marginal.size(); ++i) mean += marginal.scalar(i);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < marginal.size(); ++i) {
        const double d = marginal.scalar(i) - mean;
        var += d * d;
    }
    var /= (n - 1);

    const double mean_exact = x0 * std::exp(-t);
    const double var_exact = (1.0 - std::exp(-2.0 * t)) / 2.0;
    const double se_mean = std::sqrt(var_exact / n);
    const double se_var = var_exact * std::sqrt(2.0 / (n - 1));
    CHECK(std::abs(mean - mean_exact) <= 3.0 * se_mean + 2.0 * dt);
    CHECK(std::abs(var - var_exact) <= 3.0 * se_var + 2.0 * dt);
}

TEST_CASE("lyapunov presets") {
    // polynomial case: kappa=3, dim=1, Lambda=1, lambda+=1, slack=0.5 -> k=6.5
    chains::PolynomialPresetParams poly{3.0, 1.0, 1.0, 0.5, 1};
    const auto preset = chains::lyapunov_preset_polynomial(poly);
    CHECK(preset.exponent_k == doctest::Approx(6.5));
    CHECK(preset.phi.kind() == rates::RateFunction::Kind::Power);
    CHECK(preset.phi.param() == doctest::Approx(4.5 / 6.5));
    CHECK(std::isnan(preset.k_hint));

    const SegmentGrid grid(1.0, 4);
    const auto seg = SegmentState::constant_scalar(grid, 2.0);
    const SegmentView view{seg.values().data(), grid.points(), 1, grid.dt()};
    CHECK(preset.V(view) == doctest::Approx(std::pow(2.0, 6.5)));

    // the admissibility constraint kappa > dim Lambda / 2
    chains::PolynomialPresetParams bad{0.4, 1.0, 1.0, 0.1, 1};
    CHECK_THROWS_AS(chains::lyapunov_preset_polynomial(bad), std::invalid_argument);

    // exponential case at alpha = 1: k = kappa/(2 lambda+), linear-family rate
    chains::ExponentialPresetParams exp_params{1.0, 1.0, 0.25, 0.25, 1.0, 1};
    const auto exp_preset = chains::lyapunov_preset_exponential(exp_params);
    CHECK(exp_preset.exponent_k == doctest::Approx(2.0));
    CHECK(exp_preset.phi.kind() == rates::RateFunction::Kind::LogPower);
    CHECK(rates::rate_asymptotics(exp_preset.phi, 0.1).family == rates::RateFamily::Geometric);

    const auto far = SegmentState::constant_scalar(grid, 1.5);
    const SegmentView far_view{far.values().data(), grid.points(), 1, grid.dt()};
    CHECK(exp_preset.V(far_view) == doctest::Approx(std::exp(2.0 * 1.5)));

    // the bridge below M0 stays nonnegative and monotone
    double prev = -1e-30;
    for (int i = 0; i <= 100; ++i) {
        const auto inner =
            SegmentState::constant_scalar(grid, exp_preset.threshold_m0 * i / 100.0);
        const SegmentView iv{inner.values().data(), grid.points(), 1, grid.dt()};
        const double value = exp_preset.V(iv);
        CHECK(value >= -1e-12);
        CHECK(value >= prev - 1e-9);
        prev = value;
    }
}

TEST_CASE("coupled integration shares the driving noise") {
    chains::VkDriftParams params{1.0, 1.0, 1.0, 1, nullptr};
    chains::BoundedNoiseParams noise{0.2, 1.0, 1.0};
    auto spec = chains::delayed_noise_sdde(params, noise);

    const SegmentGrid grid(1.0, 10);
    const auto x0 = SegmentState::constant_scalar(grid, 1.0);
    const std::vector<double> schedule{0.0, 0.5, 1.0};

    // coupling a start with itself keeps the gap at zero forever
    Rng rng(8);
    chains::sdde_observe_coupled(spec, x0, x0, schedule, 0.05, rng,
                                 [](std::size_t, const SegmentView& a, const SegmentView& b) {
                                     for (int i = 0; i < a.n_points; ++i)
                                         CHECK(a.data[i] == b.data[i]);
                                 });
}
