#include "subgeom/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "subgeom/errors.hpp"

namespace subgeom::quadrature {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (positive half; symmetric).
constexpr double kKronrodNodes[8] = {
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
};
constexpr double kKronrodWeights[8] = {
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
};
// Gauss-7 weights matched to kKronrodNodes[0,2,4,6].
constexpr double kGaussWeights[4] = {
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
};

struct Panel {
    double a, b;
    double value;
    double error;
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = kKronrodWeights[0] * f(mid);
    double gauss = kGaussWeights[0] * f(mid);
    for (int i = 1; i < 8; ++i) {
        const double off = half * kKronrodNodes[i];
        const double sum = f(mid - off) + f(mid + off);
        kronrod += kKronrodWeights[i] * sum;
        if (i % 2 == 0) gauss += kGaussWeights[i / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    double err = std::abs(kronrod - gauss);
    // standard sharpening of the raw K-G difference
    if (err > 0.0) err = std::min(err, 200.0 * err * std::sqrt(200.0 * err));
    return {a, b, kronrod, err};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_floor) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::domain_error("quadrature::integrate: endpoints must be finite");

    auto worse = [](const Panel& lhs, const Panel& rhs) { return lhs.error < rhs.error; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> panels(worse);
    panels.push(evaluate_panel(f, a, b));
    double total = panels.top().value;
    double total_err = panels.top().error;

    constexpr int kMaxPanels = 4000;
    for (int n = 1; n < kMaxPanels; ++n) {
        if (total_err <= std::max(abs_floor, rel_tol * std::abs(total))) {
            if (!std::isfinite(total))
                throw NonconvergenceError("quadrature::integrate: non-finite integrand");
            return sign * total;
        }
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval no longer splittable in double precision; accept its estimate
            total_err -= worst.error;
            continue;
        }
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }
    if (total_err <= std::max(abs_floor * 10.0, 1e-8 * std::abs(total))) return sign * total;
    throw NonconvergenceError("quadrature::integrate: tolerance not reached");
}

double invert_increasing(const std::function<double(double)>& F, double y, double x_min,
                         double rel_tol) {
    constexpr int kMaxIter = 200;
    double lo = x_min;
    double f_lo = F(lo);
    if (f_lo > y) throw std::domain_error("quadrature::invert_increasing: y below F(x_min)");
    if (f_lo == y) return lo;

    double hi = (lo > 0.0) ? 2.0 * lo : 1.0;
    if (hi <= lo) hi = lo + 1.0;
    int iter = 0;
    while (F(hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (++iter > kMaxIter || !std::isfinite(hi))
            throw NonconvergenceError("quadrature::invert_increasing: bracket growth failed");
    }
    for (iter = 0; iter < kMaxIter; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;  // interval at double resolution
        if (F(mid) < y)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= rel_tol * std::max(1.0, std::abs(hi))) return 0.5 * (lo + hi);
    }
    throw NonconvergenceError("quadrature::invert_increasing: bisection cap reached");
}

}  // namespace subgeom::quadrature
