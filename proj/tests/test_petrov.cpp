#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "subgeom/errors.hpp"
#include "subgeom/petrov.hpp"

using namespace subgeom;
using rates::PsiFunction;

TEST_CASE("petrov_g closed cases against the Simpson oracle") {
    const auto linear = PsiFunction::linear();
    CHECK(rates::petrov_g(linear, 1.0) == 0.0);

    // psi(t) = t: g(x) = 1/x - 1
    const double g_half = rates::petrov_g(linear, 0.5);
    CHECK(g_half == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g_half == doctest::Approx(oracles::simpson(
                        [](double t) { return 1.0 / (t * t); }, 0.5, 1.0))
                        .epsilon(1e-9));

    // psi(t) = t^2: the quadrature oracle gives (x^{-2} - 1)/2, i.e. 1.5 at 0.5
    const auto square = PsiFunction::square();
    const double g_sq = rates::petrov_g(square, 0.5);
    const double oracle = oracles::simpson([](double t) { return 1.0 / (t * t * t); }, 0.5, 1.0);
    CHECK(oracle == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(g_sq == doctest::Approx(oracle).epsilon(1e-9));

    // strictly decreasing in x
    CHECK(rates::petrov_g(linear, 0.25) > rates::petrov_g(linear, 0.5));
}

TEST_CASE("petrov_g domain handling") {
    const auto linear = PsiFunction::linear();
    CHECK_THROWS_AS(rates::petrov_g(linear, 0.0), std::domain_error);
    CHECK_THROWS_AS(rates::petrov_g(linear, 1.5), std::domain_error);
    CHECK_THROWS_AS(rates::petrov_g(linear, 1e-13), std::domain_error);
}

TEST_CASE("g inverse matches the closed form for psi(t) = t") {
    const rates::PetrovGInverse g_inv(PsiFunction::linear(), 100.0);
    for (double y : {0.0, 0.5, 1.0, 3.0, 10.0, 99.0}) {
        // g(x) = 1/x - 1  =>  g^{-1}(y) = 1/(y+1)
        CHECK(g_inv(y) == doctest::Approx(1.0 / (y + 1.0)).epsilon(1e-9));
    }
    CHECK(g_inv(0.0) == 1.0);
}

TEST_CASE("petrov_bound_check worked examples") {
    // a0 = 1, psi(t) = t: a_1 = 0 <= g^{-1}(1) = 1/2
    const auto report1 = rates::petrov_bound_check(PsiFunction::linear(), 1.0, 2);
    CHECK(report1.all_pass);
    CHECK(report1.rows[1].a_n == 0.0);
    CHECK(report1.rows[1].g_inv_n == doctest::Approx(0.5).epsilon(1e-9));

    // a0 = 0.5: a_1 = 0.25 <= 1/2
    const auto report2 = rates::petrov_bound_check(PsiFunction::linear(), 0.5, 1);
    CHECK(report2.all_pass);
    CHECK(report2.rows[1].a_n == doctest::Approx(0.25));

    // a0 = 0 stays at the fixed point
    const auto report3 = rates::petrov_bound_check(PsiFunction::square(), 0.0, 50);
    CHECK(report3.all_pass);
    for (const auto& row : report3.rows) CHECK(row.a_n == 0.0);
}

TEST_CASE("extremal recursion is dominated by g^{-1}(n)") {
    const PsiFunction psis[] = {PsiFunction::linear(), PsiFunction::square(),
                                PsiFunction::min_two_t()};
    for (const auto& psi : psis) {
        for (double a0 : {1.0, 0.7, 0.3}) {
            const auto report = rates::petrov_bound_check(psi, a0, 2000);
            CHECK(report.all_pass);
            CHECK(report.worst_margin >= -1e-9);
        }
    }
}

TEST_CASE("psi validation and parsing") {
    CHECK_THROWS_AS(PsiFunction::custom([](double t) { return t + 0.5; }, "offset"),
                    std::invalid_argument);
    CHECK_THROWS_AS(PsiFunction::custom([](double t) { return -t; }, "negative"),
                    std::invalid_argument);
    CHECK_THROWS_AS(PsiFunction::parse("cubic"), std::invalid_argument);
    CHECK(PsiFunction::parse("min2t").psi(0.25) == doctest::Approx(0.5));
    const auto ok = PsiFunction::custom([](double t) { return std::min(1.0, t * t); }, "sq");
    CHECK(ok.psi(0.5) == doctest::Approx(0.25));
}

TEST_CASE("petrov report serializes") {
    const auto report = rates::petrov_bound_check(PsiFunction::linear(), 0.7, 10);
    const auto json = report.to_json();
    CHECK(json.at("all_pass").get<bool>());
    CHECK(json.at("rows").size() == 11);
}
