#pragma once

#include <functional>

namespace subgeom::quadrature {

/// Default tolerances for all rate-function integrals.
inline constexpr double kRelTol = 1e-10;
inline constexpr double kAbsFloor = 1e-14;

/**
 * Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
 *
 * Subdivides the worst interval until the summed error estimate drops below
 * max(abs_floor, rel_tol * |integral|).  Throws NonconvergenceError when the
 * subdivision budget is exhausted first.
 */
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = kRelTol, double abs_floor = kAbsFloor);

/**
 * Solve F(x) = y for an increasing F with F(x_min) <= y, by exponential
 * bracket growth from x_min followed by bisection.  200-iteration cap on
 * each phase; throws NonconvergenceError past the cap.
 */
double invert_increasing(const std::function<double(double)>& F, double y, double x_min,
                         double rel_tol = 1e-12);

}  // namespace subgeom::quadrature
