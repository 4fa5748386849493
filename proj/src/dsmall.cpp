#include "subgeom/dsmall.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "subgeom/transport.hpp"

namespace subgeom::lyapunov {

namespace {

constexpr double kZ95 = 1.959963984540054;

transport::EmpiricalMeasure enumerated_marginal(const chains::DiscreteModel& model, double x) {
    std::vector<transport::Point> pts;
    std::vector<double> ws;
    for (const auto& [y, p] : model.enumerate_step(x)) {
        pts.push_back({y});
        ws.push_back(p);
    }
    return transport::EmpiricalMeasure(std::move(pts), std::move(ws));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
    Rng rng(seed, counter);
    return rng.next_u64();
}

struct RatioEstimate {
    double mean;
    double ci95;
    bool exact;
    bool upper_bound_only;
};

/// W(P(x,.), P(y,.)) / denom over batched sampled marginals with the given
/// transport functional, or exactly via the enumerator.
///
/// Empirical-vs-empirical transport distances are biased upward by the
/// multinomial fluctuation of the two samples, so the sampled path subtracts
/// the null distance between two independent draws of the same kernel
/// (clamped at zero) before forming the ratio.
RatioEstimate pair_ratio(const chains::DiscreteModel& model, double x, double y, double denom,
                         const std::function<double(const transport::EmpiricalMeasure&,
                                                    const transport::EmpiricalMeasure&)>& distance,
                         const std::function<double(double, double)>& point_cost,
                         bool enumerate, int n_mc, int batches, int exact_ot_cap,
                         std::uint64_t seed, Exec exec) {
    if (enumerate) {
        const auto mx = enumerated_marginal(model, x);
        const auto my = enumerated_marginal(model, y);
        return {distance(mx, my) / denom, 0.0, true, false};
    }

    const int per_batch = std::max(2, n_mc / std::max(1, batches));
    std::vector<double> ratios;
    bool upper_bound_only = false;
    for (int b = 0; b < batches; ++b) {
        auto draw = [&](double start, std::uint64_t stream) {
            return chains::sample_marginal(model, start, 1, per_batch,
                                           derive_seed(seed, stream), exec)
                .deduplicated();
        };
        const std::uint64_t base = 4 * static_cast<std::uint64_t>(b);
        const auto mx = draw(x, base);
        const auto my = draw(y, base + 1);
        if (mx.size() <= static_cast<std::size_t>(exact_ot_cap) &&
            my.size() <= static_cast<std::size_t>(exact_ot_cap)) {
            const auto mx2 = draw(x, base + 2);
            const auto my2 = draw(y, base + 3);
            const double null_floor = 0.5 * (distance(mx, mx2) + distance(my, my2));
            const double corrected = std::max(0.0, distance(mx, my) - null_floor);
            ratios.push_back(corrected / denom);
        } else {
            // synchronous coupling: both chains consume the same draws
            upper_bound_only = true;
            double mean = 0.0;
            const std::uint64_t sub_seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(b));
            for (int i = 0; i < per_batch; ++i) {
                Rng rng_x(sub_seed, static_cast<std::uint64_t>(i));
                Rng rng_y = rng_x;
                const double dx = model.step(x, rng_x);
                const double dy = model.step(y, rng_y);
                mean += point_cost(dx, dy);
            }
            ratios.push_back(mean / per_batch / denom);
        }
    }
    double mean = 0.0;
    for (double r : ratios) mean += r;
    mean /= static_cast<double>(ratios.size());
    double var = 0.0;
    for (double r : ratios) var += (r - mean) * (r - mean);
    var /= std::max<std::size_t>(1, ratios.size() - 1);
    return {mean, kZ95 * std::sqrt(var / static_cast<double>(ratios.size())), false,
            upper_bound_only};
}

}  // namespace

SemimetricL::SemimetricL(transport::Metric d, std::function<double(const transport::Point&)> V,
                         rates::RateFunction phi, double p, double beta)
    : d_(std::move(d)), v_(std::move(V)), phi_(std::move(phi)), p_(p), beta_(beta) {
    if (!v_) throw std::invalid_argument("SemimetricL: V must be provided");
    if (!(beta_ >= 0.0)) throw std::invalid_argument("SemimetricL: beta must be >= 0");
    if (p_ == 1.0) {
        if (beta_ != 0.0)
            throw std::invalid_argument("SemimetricL: p = 1 is only allowed with beta = 0");
        q_ = std::numeric_limits<double>::infinity();
    } else {
        if (!(p_ > 1.0)) throw std::invalid_argument("SemimetricL: p must be > 1");
        q_ = p_ / (p_ - 1.0);
    }
}

double SemimetricL::operator()(const transport::Point& x, const transport::Point& y) const {
    const double base = d_(x, y);
    if (base == 0.0) return 0.0;
    const double d_part = std::pow(base, 1.0 / p_);
    if (beta_ == 0.0 && std::isinf(q_)) return d_part;
    const double weight = 1.0 + beta_ * phi_(v_(x) + v_(y));
    return d_part * std::pow(weight, 1.0 / q_);
}

double SemimetricL::eval_scalar(double x, double y) const {
    return (*this)(transport::Point{x}, transport::Point{y});
}

double contraction_beta(double rho, double q, double K, double R, const rates::RateFunction& phi) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("contraction_beta: rho must lie in (0,1)");
    if (!(q > 1.0)) throw std::domain_error("contraction_beta: q must be > 1");
    if (!(K >= 0.0) || !(R > 0.0)) throw std::domain_error("contraction_beta: need K >= 0 and R > 0");
    const double denom = phi(2.0 * K + R);
    if (!(denom > 0.0)) throw std::domain_error("contraction_beta: phi(2K + R) must be positive");
    return (std::pow(1.0 + rho / (2.0 - 2.0 * rho), q - 1.0) - 1.0) / denom;
}

Verdict DsmallReport::verdict() const {
    double worst = 0.0;
    double worst_ci = 0.0;
    for (const auto& p : pairs)
        if (p.ratio_mean > worst) {
            worst = p.ratio_mean;
            worst_ci = p.ratio_ci95;
        }
    if (worst + 3.0 * worst_ci < 1.0) return Verdict::Pass;
    if (worst - 3.0 * worst_ci > 1.0) return Verdict::Fail;
    return Verdict::Inconclusive;
}

nlohmann::json DsmallReport::to_json() const {
    nlohmann::json pair_rows = nlohmann::json::array();
    for (const auto& p : pairs)
        pair_rows.push_back({{"x", p.x},
                             {"y", p.y},
                             {"d", p.base},
                             {"ratio", p.ratio_mean},
                             {"ci95", p.ratio_ci95},
                             {"exact", p.exact},
                             {"upper_bound_only", p.upper_bound_only}});
    nlohmann::json out{{"rho_hat", rho_hat},
                       {"ci95", ci95},
                       {"exact", exact},
                       {"any_upper_bound_only", any_upper_bound_only},
                       {"R", r_level},
                       {"verdict", verdict_name(verdict())},
                       {"pairs", std::move(pair_rows)}};
    if (has_r_threshold) {
        out["r_threshold"] = r_threshold;
        out["r_near_threshold"] = r_near_threshold;
    }
    return out;
}

std::string DsmallReport::to_table() const {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%10s %10s %12s %12s %10s %s\n", "x", "y", "d(x,y)", "ratio",
                  "ci95", "mode");
    out << line;
    for (const auto& p : pairs) {
        std::snprintf(line, sizeof(line), "%10.6g %10.6g %12.6g %12.6g %10.3g %s\n", p.x, p.y,
                      p.base, p.ratio_mean, p.ratio_ci95,
                      p.exact ? "exact" : (p.upper_bound_only ? "upper-bound" : "mc"));
        out << line;
    }
    std::snprintf(line, sizeof(line), "rho_hat = %.6g +- %.3g (%s)\n", rho_hat, ci95,
                  verdict_name(verdict()).c_str());
    out << line;
    if (has_r_threshold) {
        std::snprintf(line, sizeof(line), "R = %.6g, phi^{-1}(2K) = %.6g%s\n", r_level, r_threshold,
                      r_near_threshold ? "  [R within noise of the admissibility threshold]" : "");
        out << line;
    }
    return out.str();
}

DsmallReport estimate_dsmall(const chains::DiscreteModel& model, const transport::Metric& d,
                             const std::function<double(double)>& V, double R,
                             std::span<const std::pair<double, double>> pairs,
                             const DsmallOptions& options) {
    if (pairs.empty()) throw std::invalid_argument("estimate_dsmall: no pairs");
    if (!V) throw std::invalid_argument("estimate_dsmall: level-set V must be provided");

    DsmallReport report;
    report.r_level = R;
    report.exact = true;

    const bool enumerate = options.prefer_enumeration && static_cast<bool>(model.enumerate_step);
    auto distance = [&d](const transport::EmpiricalMeasure& a,
                         const transport::EmpiricalMeasure& b) {
        return transport::wasserstein_exact(a, b, d).first;
    };
    auto point_cost = [&d](double u, double v) {
        return d(transport::Point{u}, transport::Point{v});
    };

    double worst_ratio = -1.0;
    double worst_ci = 0.0;
    std::uint64_t pair_counter = 0;
    for (const auto& [x, y] : pairs) {
        if (V(x) + V(y) > R + 1e-12)
            throw std::invalid_argument("estimate_dsmall: pair outside the level set V(x)+V(y) <= R");
        const double dxy = d(transport::Point{x}, transport::Point{y});
        if (!(dxy > 0.0))
            throw std::invalid_argument("estimate_dsmall: degenerate pair with d(x,y) = 0");

        const RatioEstimate est =
            pair_ratio(model, x, y, dxy, distance, point_cost, enumerate, options.n_mc,
                       options.batches, options.exact_ot_cap,
                       derive_seed(options.seed, pair_counter++), options.exec);
        report.pairs.push_back({x, y, dxy, est.mean, est.ci95, est.exact, est.upper_bound_only});
        report.exact = report.exact && est.exact;
        report.any_upper_bound_only = report.any_upper_bound_only || est.upper_bound_only;
        if (est.mean > worst_ratio) {
            worst_ratio = est.mean;
            worst_ci = est.ci95;
        }
    }
    report.rho_hat = 1.0 - worst_ratio;
    report.ci95 = worst_ci;

    if (options.phi != nullptr) {
        report.has_r_threshold = true;
        report.r_threshold = options.phi->inverse(2.0 * options.drift_k);
        const double conservative =
            options.phi->inverse(2.0 * (options.drift_k + 3.0 * options.drift_k_ci95));
        report.r_near_threshold = !(R > conservative);
    }
    return report;
}

std::vector<std::pair<double, double>> sample_level_pairs(
    const std::function<double(double)>& V, double R, double box_lo, double box_hi,
    std::size_t count, std::uint64_t seed) {
    if (!(box_hi > box_lo)) throw std::invalid_argument("sample_level_pairs: empty box");
    std::vector<std::pair<double, double>> pairs;
    Rng rng(seed);
    std::size_t attempts = 0;
    while (pairs.size() < count) {
        if (++attempts > 1000 * (count + 1))
            throw std::invalid_argument("sample_level_pairs: rejection rate too high for this R");
        const double x = rng.uniform(box_lo, box_hi);
        const double y = rng.uniform(box_lo, box_hi);
        if (x == y) continue;
        if (V(x) + V(y) <= R) pairs.emplace_back(x, y);
    }
    return pairs;
}

std::string ContractionReport::to_table() const {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%10s %10s %12s %12s %12s %10s\n", "x", "y", "l(x,y)",
                  "V(x)+V(y)", "ratio", "ci95");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%10.6g %10.6g %12.6g %12.6g %12.6g %10.3g\n", r.x, r.y,
                      r.l_xy, r.v_sum, r.ratio_mean, r.ratio_ci95);
        out << line;
    }
    std::snprintf(line, sizeof(line), "max ratio %.6g (%s)%s\n", max_ratio,
                  never_expands ? "never expands" : "EXPANDS",
                  sampling_dominated ? "  [ci crosses 1: sampling dominated]" : "");
    out << line;
    return out.str();
}

nlohmann::json ContractionReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"x", r.x},
                             {"y", r.y},
                             {"l", r.l_xy},
                             {"v_sum", r.v_sum},
                             {"ratio", r.ratio_mean},
                             {"ci95", r.ratio_ci95},
                             {"exact", r.exact}});
    return {{"max_ratio", max_ratio},
            {"never_expands", never_expands},
            {"sampling_dominated", sampling_dominated},
            {"rows", std::move(rows_json)}};
}

ContractionReport estimate_onestep_l_contraction(const chains::DiscreteModel& model,
                                                 const SemimetricL& l,
                                                 std::span<const std::pair<double, double>> pairs,
                                                 int n_mc, std::uint64_t seed, Exec exec) {
    if (pairs.empty()) throw std::invalid_argument("estimate_onestep_l_contraction: no pairs");
    ContractionReport report;
    const bool enumerate = static_cast<bool>(model.enumerate_step);
    auto distance = [&l](const transport::EmpiricalMeasure& a,
                         const transport::EmpiricalMeasure& b) {
        return transport::wasserstein_with_cost(
                   a, b,
                   [&l](const transport::Point& u, const transport::Point& v) { return l(u, v); })
            .first;
    };
    auto point_cost = [&l](double u, double v) { return l.eval_scalar(u, v); };

    std::uint64_t pair_counter = 0;
    for (const auto& [x, y] : pairs) {
        const double base = l.eval_scalar(x, y);
        if (!(base > 0.0))
            throw std::invalid_argument("estimate_onestep_l_contraction: pair with l(x,y) = 0");
        const RatioEstimate est =
            pair_ratio(model, x, y, base, distance, point_cost, enumerate, n_mc, 8, 512,
                       derive_seed(seed, pair_counter++), exec);
        const double v_sum = l.v_at(transport::Point{x}) + l.v_at(transport::Point{y});
        report.rows.push_back({x, y, base, v_sum, est.mean, est.ci95, est.exact});
        report.max_ratio = std::max(report.max_ratio, est.mean);
        if (est.ci95 > 0.0 && est.mean - est.ci95 < 1.0 && est.mean + est.ci95 > 1.0)
            report.sampling_dominated = true;
    }
    report.never_expands = report.max_ratio <= 1.0 + 1e-12;
    return report;
}

}  // namespace subgeom::lyapunov
