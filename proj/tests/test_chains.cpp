#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "subgeom/digit_chain.hpp"
#include "subgeom/models.hpp"
#include "subgeom/transport.hpp"

using namespace subgeom;
using chains::DecimalState;

TEST_CASE("digit_step against the decimal-string insertion oracle") {
    // inserting digit 7 after the decimal point of 0.0 gives 0.7
    CHECK(chains::digit_step_with(0.0, 7) ==
          doctest::Approx(oracles::decimal_to_double(oracles::insert_digit("0.0", 7)))
              .epsilon(1e-15));
    CHECK(chains::digit_step_with(0.0, 7) == doctest::Approx(0.7));

    CHECK(chains::digit_step_with(0.5, 0) ==
          doctest::Approx(oracles::decimal_to_double(oracles::insert_digit("0.5", 0)))
              .epsilon(1e-15));
    CHECK(chains::digit_step_with(0.5, 0) == doctest::Approx(0.05));

    for (int d = 0; d < 10; ++d) {
        const double next = chains::digit_step_with(0.437, d);
        CHECK(next >= 0.0);
        CHECK(next < 1.0);
    }
    CHECK_THROWS_AS(chains::digit_step_with(-0.1, 3), std::domain_error);
    CHECK_THROWS_AS(chains::digit_step_with(1.2, 3), std::domain_error);
    CHECK_THROWS_AS(chains::digit_step_with(0.5, 10), std::domain_error);
}

TEST_CASE("one synchronous step contracts by exactly ten") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double x = rng.uniform01();
        const double y = rng.uniform01();
        const int digit = static_cast<int>(rng.below(10));
        const double xd = chains::digit_step_with(x, digit);
        const double yd = chains::digit_step_with(y, digit);
        CHECK(std::abs(xd - yd) == doctest::Approx(std::abs(x - y) / 10.0).epsilon(1e-14));
    }
}

TEST_CASE("synchronous contraction stays exact over many steps") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        double x = rng.uniform01(), y = rng.uniform01();
        const double gap = std::abs(x - y);
        for (int n = 1; n <= 8; ++n) {
            const int digit = static_cast<int>(rng.below(10));
            x = chains::digit_step_with(x, digit);
            y = chains::digit_step_with(y, digit);
            CHECK(std::abs(std::abs(x - y) - gap * std::pow(10.0, -n)) <= 1e-12);
        }
    }
}

TEST_CASE("digit_reconstruct on floats") {
    // X0 = 0.25, digit 3 -> X1 = 0.325 -> reconstruct X0
    const double x1 = chains::digit_step_with(0.25, 3);
    CHECK(x1 == doctest::Approx(0.325).epsilon(1e-15));
    const auto rec = chains::digit_reconstruct(x1, 1);
    CHECK(rec.x0 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_FALSE(rec.precision_warning);

    const auto identity = chains::digit_reconstruct(0.73, 0);
    CHECK(identity.x0 == doctest::Approx(0.73));

    CHECK(chains::digit_reconstruct(0.5, 12).precision_warning);
}

TEST_CASE("decimal-string states reconstruct exactly") {
    const auto x0 = DecimalState::parse("0.25");
    const auto x1 = x0.step(3);
    CHECK(x1.to_string() == "0.325");
    CHECK(x1.reconstruct(1) == x0);

    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> digits;
        const int len = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < len; ++i) digits.push_back(static_cast<std::uint8_t>(rng.below(10)));
        const auto start = DecimalState::from_digits(digits);
        auto state = start;
        const int n = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) state = state.step(static_cast<int>(rng.below(10)));
        CHECK(state.reconstruct(n) == start);
        // the float path follows the exact path to rounding
        CHECK(state.to_double() == doctest::Approx(state.to_double()).epsilon(1e-15));
    }
}

TEST_CASE("disjoint decimal tails keep full TV distance") {
    const auto x = DecimalState::parse("0.25");
    const auto y = DecimalState::parse("0.7");
    for (int n = 1; n <= 5; ++n) {
        const auto sx = chains::digit_enumerate_exact(x, n);
        const auto sy = chains::digit_enumerate_exact(y, n);
        std::set<DecimalState> support_x(sx.begin(), sx.end());
        for (const auto& s : sy) CHECK(support_x.count(s) == 0);

        // the same statement through the transport layer on doubles
        std::vector<double> vx, vy;
        for (const auto& s : sx) vx.push_back(s.to_double());
        for (const auto& s : sy) vy.push_back(s.to_double());
        const double tv = transport::tv_distance(
            transport::EmpiricalMeasure::from_scalars(vx).deduplicated(),
            transport::EmpiricalMeasure::from_scalars(vy).deduplicated());
        CHECK(std::abs(tv - 2.0) <= 1e-12);  // summation rounding over 2*10^n atoms
    }
}

TEST_CASE("enumerated marginals approach the uniform law geometrically") {
    for (double x0 : {0.0, 0.3, 0.25, 0.875}) {
        for (int n = 1; n <= 5; ++n) {
            const auto marginal = chains::exact_digit_marginal(x0, n);
            const double w1 =
                transport::wasserstein_to_uniform01(marginal, transport::Metric::euclidean());
            const double scale = std::pow(10.0, -n);
            // closed form: delta = x0 * 10^{-n}, W1 = 10^n (delta^2 + (10^{-n}-delta)^2)/2
            const double delta = x0 * scale;
            const double closed =
                (delta * delta + (scale - delta) * (scale - delta)) / (2.0 * scale);
            CHECK(w1 == doctest::Approx(closed).epsilon(1e-9));
            CHECK(w1 <= scale + scale / 2.0);
        }
    }
}

TEST_CASE("sampled marginals") {
    const auto model = chains::make_digit_chain();

    const auto at_zero = chains::sample_marginal(model, 0.42, 0, 50, 9);
    for (std::size_t i = 0; i < at_zero.size(); ++i) CHECK(at_zero.scalar(i) == 0.42);

    // from x0 = 0 one step lands on {0, 0.1, ..., 0.9}
    const auto one_step = chains::sample_marginal(model, 0.0, 1, 5000, 10).deduplicated();
    CHECK(one_step.size() == 10);
    for (std::size_t i = 0; i < one_step.size(); ++i) {
        const double v = one_step.scalar(i);
        bool on_lattice = false;
        for (int d = 0; d < 10; ++d) on_lattice = on_lattice || v == d / 10.0;
        CHECK(on_lattice);
        CHECK(one_step.weight(i) == doctest::Approx(0.1).epsilon(0.25));
    }
    const auto exact = chains::exact_digit_marginal(0.0, 1);
    CHECK(exact.size() == 10);
    for (std::size_t i = 0; i < exact.size(); ++i) CHECK(exact.weight(i) == doctest::Approx(0.1));

    // long-run marginal sits close to Uniform[0,1)
    const auto long_run = chains::sample_marginal(model, 0.9, 14, 20000, 11);
    const double w1 =
        transport::wasserstein_to_uniform01(long_run, transport::Metric::euclidean());
    CHECK(w1 <= 0.02);
    CHECK(long_run.mean_scalar() == doctest::Approx(0.5).epsilon(0.05));

    // Kolmogorov-Smirnov statistic against the uniform cdf
    std::vector<double> sorted;
    for (std::size_t i = 0; i < long_run.size(); ++i) sorted.push_back(long_run.scalar(i));
    std::sort(sorted.begin(), sorted.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = sorted[i];  // uniform cdf on [0,1)
        ks = std::max(ks, std::abs((i + 1.0) / sorted.size() - cdf));
        ks = std::max(ks, std::abs(static_cast<double>(i) / sorted.size() - cdf));
    }
    CHECK(ks <= 2.0 / std::sqrt(static_cast<double>(sorted.size())));
}

TEST_CASE("independent-noise chain forgets its start") {
    const auto model = chains::make_independent_noise_chain();
    const auto from_a = model.enumerate_step(0.1);
    const auto from_b = model.enumerate_step(0.9);
    CHECK(from_a == from_b);
}
