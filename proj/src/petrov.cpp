#include "subgeom/petrov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subgeom/errors.hpp"
#include "subgeom/quadrature.hpp"

namespace subgeom::rates {

namespace {

constexpr double kXFloor = 1e-12;
constexpr double kOverflowGuard = 1e15;

void validate_psi(const std::function<double(double)>& psi, const std::string& name) {
    if (!psi) throw std::invalid_argument("PsiFunction: null callable");
    if (std::abs(psi(0.0)) > 1e-12)
        throw std::invalid_argument("PsiFunction '" + name + "': psi(0) must be 0");
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double t = i / 100.0;
        const double v = psi(t);
        if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
            throw std::invalid_argument("PsiFunction '" + name + "': range must be [0,1]");
        if (v < prev - 1e-12)
            throw std::invalid_argument("PsiFunction '" + name + "': must be nondecreasing");
        prev = v;
    }
    if (!(psi(1.0) > 0.0))
        throw std::invalid_argument("PsiFunction '" + name + "': psi must be positive on (0,1]");
}

}  // namespace

PsiFunction PsiFunction::linear() {
    return {[](double t) { return t; }, "linear"};
}

PsiFunction PsiFunction::square() {
    return {[](double t) { return t * t; }, "square"};
}

PsiFunction PsiFunction::min_two_t() {
    return {[](double t) { return std::min(1.0, 2.0 * t); }, "min2t"};
}

PsiFunction PsiFunction::custom(std::function<double(double)> psi, std::string name) {
    validate_psi(psi, name);
    return {std::move(psi), std::move(name)};
}

PsiFunction PsiFunction::parse(std::string_view token) {
    if (token == "linear") return linear();
    if (token == "square") return square();
    if (token == "min2t") return min_two_t();
    throw std::invalid_argument("PsiFunction::parse: unknown psi '" + std::string(token) + "'");
}

double petrov_g(const PsiFunction& psi, double x) {
    if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("petrov_g: x must lie in (0,1]");
    if (x < kXFloor) throw std::domain_error("petrov_g: x below the 1e-12 evaluation floor");
    if (x == 1.0) return 0.0;

    auto integrand = [&psi](double t) { return 1.0 / (t * psi.psi(t)); };
    // dyadic segments keep each adaptive call mild even when the integrand
    // blows up toward zero
    double total = 0.0;
    double hi = 1.0;
    while (hi > 2.0 * x) {
        const double lo = hi / 2.0;
        total += quadrature::integrate(integrand, lo, hi);
        if (total > kOverflowGuard)
            throw NonconvergenceError("petrov_g: integral exceeds overflow guard (divergent end)");
        hi = lo;
    }
    total += quadrature::integrate(integrand, x, hi);
    if (total > kOverflowGuard)
        throw NonconvergenceError("petrov_g: integral exceeds overflow guard (divergent end)");
    return total;
}

PetrovGInverse::PetrovGInverse(const PsiFunction& psi, double y_max) : psi_(psi) {
    if (!(y_max >= 0.0)) throw std::invalid_argument("PetrovGInverse: y_max must be >= 0");
    auto integrand = [this](double t) { return 1.0 / (t * psi_.psi(t)); };
    const double ratio = std::pow(2.0, 0.25);
    grid_.push_back(1.0);
    cumulative_.push_back(0.0);
    while (cumulative_.back() < y_max + 1.0) {
        const double next = grid_.back() / ratio;
        if (next < kXFloor / 4.0)
            throw NonconvergenceError("PetrovGInverse: grid exhausted before reaching y_max");
        const double piece = quadrature::integrate(integrand, next, grid_.back());
        grid_.push_back(next);
        cumulative_.push_back(cumulative_.back() + piece);
    }
}

double PetrovGInverse::g_local(double x, std::size_t segment) const {
    auto integrand = [this](double t) { return 1.0 / (t * psi_.psi(t)); };
    return cumulative_[segment] + quadrature::integrate(integrand, x, grid_[segment]);
}

double PetrovGInverse::operator()(double y) const {
    if (y <= 0.0) return 1.0;
    if (y > cumulative_.back())
        throw std::domain_error("PetrovGInverse: y beyond the precomputed range");
    // find segment with cumulative_[i] <= y <= cumulative_[i+1]
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), y);
    std::size_t seg = static_cast<std::size_t>(it - cumulative_.begin());
    if (seg > 0) --seg;

    double hi = grid_[seg];       // g(hi) = cumulative_[seg] <= y
    double lo = grid_[seg + 1];   // g(lo) >= y
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 80; ++iter) {
        const double gx = g_local(x, seg);
        const double err = gx - y;
        if (std::abs(err) <= 1e-12 * std::max(1.0, y)) return x;
        if (err > 0.0)
            lo = x;
        else
            hi = x;
        const double slope = -1.0 / (x * psi_.psi(x));
        double next = x - err / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * hi) return 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

nlohmann::json PetrovReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) {
        rows_json.push_back({{"n", row.n},
                             {"a_n", row.a_n},
                             {"g_inv_n", row.g_inv_n},
                             {"margin", row.margin},
                             {"pass", row.pass}});
    }
    return {{"all_pass", all_pass},
            {"worst_margin", worst_margin},
            {"worst_n", worst_n},
            {"rows", std::move(rows_json)}};
}

PetrovReport petrov_bound_check(const PsiFunction& psi, double a0, int n_max) {
    if (!(a0 >= 0.0 && a0 <= 1.0))
        throw std::invalid_argument("petrov_bound_check: a0 must lie in [0,1]");
    if (n_max < 1) throw std::invalid_argument("petrov_bound_check: n_max must be >= 1");

    PetrovGInverse g_inv(psi, static_cast<double>(n_max));
    PetrovReport report;
    report.rows.reserve(static_cast<std::size_t>(n_max) + 1);
    report.all_pass = true;
    report.worst_margin = std::numeric_limits<double>::infinity();
    report.worst_n = 0;

    double a = a0;
    for (int n = 0; n <= n_max; ++n) {
        const double bound = g_inv(static_cast<double>(n));
        const double margin = bound - a;
        const bool pass = margin >= -1e-9;
        report.rows.push_back({n, a, bound, margin, pass});
        if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.worst_n = n;
        }
        report.all_pass = report.all_pass && pass;
        const double step = psi.psi(a);
        a = a * (1.0 - std::min(1.0, std::max(0.0, step)));
        if (a < 0.0) a = 0.0;
    }
    return report;
}

}  // namespace subgeom::rates
