#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace subgeom::rates {

/// Modulus psi: [0, inf) -> [0, 1], continuous, nondecreasing, psi(0) = 0 and
/// psi(x) > 0 for x > 0, driving the recursion a_{n+1} <= a_n (1 - psi(a_n)).
struct PsiFunction {
    std::function<double(double)> psi;
    std::string name;

    static PsiFunction linear();     // psi(t) = t
    static PsiFunction square();     // psi(t) = t^2
    static PsiFunction min_two_t();  // psi(t) = min(1, 2t)
    static PsiFunction custom(std::function<double(double)> psi, std::string name = "custom");
    static PsiFunction parse(std::string_view token);  // "linear" | "square" | "min2t"
};

/// g(x) = int_x^1 dt / (t psi(t)) for x in (0, 1]; strictly decreasing with
/// g(1) = 0 and g unbounded toward 0.  Evaluation below 1e-12 is rejected.
double petrov_g(const PsiFunction& psi, double x);

/**
 * Precomputed inverse of g on [0, y_max].  Builds a cumulative table of g on
 * a log-spaced grid, then solves g(x) = y by Newton iterations with a
 * bisection fallback inside the bracketing table segment.
 */
class PetrovGInverse {
  public:
    PetrovGInverse(const PsiFunction& psi, double y_max);

    double operator()(double y) const;  // g^{-1}(y), y >= 0

  private:
    double g_local(double x, std::size_t segment) const;

    PsiFunction psi_;
    std::vector<double> grid_;        // decreasing from 1
    std::vector<double> cumulative_;  // g at grid points
};

struct PetrovRow {
    int n;
    double a_n;
    double g_inv_n;
    double margin;  // g^{-1}(n) - a_n; pass iff margin >= -1e-9
    bool pass;
};

struct PetrovReport {
    std::vector<PetrovRow> rows;
    bool all_pass;
    double worst_margin;
    int worst_n;

    nlohmann::json to_json() const;
};

/// Iterate the extremal recursion a_{n+1} = a_n (1 - psi(a_n)) from a0 and
/// compare each iterate against g^{-1}(n) + 1e-9.
PetrovReport petrov_bound_check(const PsiFunction& psi, double a0, int n_max);

}  // namespace subgeom::rates
