#include "subgeom/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "subgeom/digit_chain.hpp"

namespace subgeom::chains {

DiscreteModel make_digit_chain() {
    DiscreteModel model;
    model.name = "digit";
    model.step = [](double x, Rng& rng) { return digit_step(x, rng); };
    model.enumerate_step = [](double x) {
        std::vector<std::pair<double, double>> outcomes;
        outcomes.reserve(10);
        for (int d = 0; d < 10; ++d) outcomes.emplace_back(digit_step_with(x, d), 0.1);
        return outcomes;
    };
    model.analytic_uniform01_limit = true;
    return model;
}

DiscreteModel make_independent_noise_chain() {
    DiscreteModel model;
    model.name = "independent";
    model.step = [](double, Rng& rng) { return static_cast<double>(rng.below(10)) / 10.0; };
    model.enumerate_step = [](double) {
        std::vector<std::pair<double, double>> outcomes;
        outcomes.reserve(10);
        for (int d = 0; d < 10; ++d) outcomes.emplace_back(d / 10.0, 0.1);
        return outcomes;
    };
    return model;
}

transport::EmpiricalMeasure sample_marginal(const DiscreteModel& model, double x0, int n_steps,
                                            int n_samples, std::uint64_t seed, Exec exec) {
    if (n_samples < 1) throw std::invalid_argument("sample_marginal: need n_samples >= 1");
    if (n_steps < 0) throw std::invalid_argument("sample_marginal: need n_steps >= 0");
    std::vector<double> terminal(static_cast<std::size_t>(n_samples));
    for_index(n_samples, exec, [&](std::int64_t i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        double x = x0;
        for (int s = 0; s < n_steps; ++s) x = model.step(x, rng);
        terminal[static_cast<std::size_t>(i)] = x;
    });
    return transport::EmpiricalMeasure::from_scalars(terminal);
}

transport::EmpiricalMeasure sample_marginal(const ContinuousModel& model, const SegmentState& x0,
                                            double horizon, int n_samples, std::uint64_t seed,
                                            SddeObservable observable, Exec exec) {
    if (n_samples < 1) throw std::invalid_argument("sample_marginal: need n_samples >= 1");
    std::vector<transport::Point> terminal(static_cast<std::size_t>(n_samples));
    for_index(n_samples, exec, [&](std::int64_t i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        const SegmentState end = sdde_integrate(model.spec, x0, horizon, model.dt, rng);
        terminal[static_cast<std::size_t>(i)] =
            (observable == SddeObservable::Segment) ? end.flat() : end.current();
    });
    return transport::EmpiricalMeasure::uniform(std::move(terminal));
}

transport::EmpiricalMeasure exact_digit_marginal(double x0, int n_steps) {
    return transport::EmpiricalMeasure::from_scalars(digit_enumerate_marginal(x0, n_steps));
}

namespace {

/// Quintic through the origin with q(0)=q'(0)=q''(0)=0 matching value, slope
/// and curvature at h; used to bridge exp(k s^alpha) down to zero.
struct QuinticBridge {
    double a, b, c, h;

    static QuinticBridge match(double h, double value, double slope, double curvature) {
        // scale so the unknowns are X = a, Y = b h, Z = c h^2:
        //   X +  Y +  Z = value / h^3
        //  3X + 4Y + 5Z = slope / h^2
        //  6X + 12Y + 20Z = curvature / h
        const double v = value / (h * h * h);
        const double s = slope / (h * h);
        const double w = curvature / h;
        const double r1 = s - 3.0 * v;        // Y + 2Z
        const double r2 = 0.5 * (w - 6.0 * v);  // 3Y + 7Z
        const double z = r2 - 3.0 * r1;
        const double y = r1 - 2.0 * z;
        const double x = v - y - z;
        QuinticBridge q;
        q.h = h;
        q.a = x;
        q.b = y / h;
        q.c = z / (h * h);
        return q;
    }

    double operator()(double s) const { return s * s * s * (a + b * s + c * s * s); }
};

}  // namespace

LyapunovPreset lyapunov_preset_exponential(const ExponentialPresetParams& p) {
    if (!(p.alpha > 0.0 && p.alpha <= 1.0))
        throw std::invalid_argument("lyapunov_preset_exponential: alpha must lie in (0,1]");
    if (!(p.kappa > 0.0) || !(p.lambda_plus > 0.0) || !(p.big_lambda >= 0.0) || !(p.big_m > 0.0))
        throw std::invalid_argument("lyapunov_preset_exponential: bad coefficients");

    const double k = p.kappa / (2.0 * p.lambda_plus * p.alpha);
    const double c1 = p.lambda_plus * (p.alpha - 2.0) + p.dim * p.big_lambda;
    double m0 = std::max(p.big_m, std::pow(2.0 / k, 1.0 / p.alpha));
    if (c1 > 0.0) m0 = std::max(m0, std::pow(c1 / p.kappa, 1.0 / p.alpha));

    const double u0 = std::exp(k * std::pow(m0, p.alpha));
    const double du = k * p.alpha * std::pow(m0, p.alpha - 1.0) * u0;
    const double ddu = du * du / u0 + k * p.alpha * (p.alpha - 1.0) * std::pow(m0, p.alpha - 2.0) * u0;
    const QuinticBridge bridge = QuinticBridge::match(m0, u0, du, ddu);

    // the bridge must stay nonnegative and nondecreasing to be a usable V
    double prev = 0.0;
    for (int i = 1; i <= 256; ++i) {
        const double s = m0 * i / 256.0;
        const double q = bridge(s);
        if (q < -1e-12 * u0 || q < prev - 1e-9 * u0)
            throw std::invalid_argument(
                "lyapunov_preset_exponential: bridge not monotone for these parameters");
        prev = q;
    }

    const double alpha = p.alpha;
    return LyapunovPreset{
        [k, alpha, m0, bridge](const SegmentView& seg) {
            const double norm = seg.current_norm();
            if (norm >= m0) return std::exp(k * std::pow(norm, alpha));
            return bridge(norm);
        },
        rates::RateFunction::log_power(p.alpha),
        k,
        m0,
        std::numeric_limits<double>::quiet_NaN(),
        "drift constant not derivable from the coefficients; estimate empirically"};
}

LyapunovPreset lyapunov_preset_polynomial(const PolynomialPresetParams& p) {
    if (!(p.kappa > 0.0) || !(p.lambda_plus > 0.0) || !(p.big_lambda >= 0.0))
        throw std::invalid_argument("lyapunov_preset_polynomial: bad coefficients");
    if (!(p.kappa > p.dim * p.big_lambda / 2.0))
        throw std::invalid_argument(
            "lyapunov_preset_polynomial: requires kappa > dim * Lambda / 2");
    const double k = 2.0 + (2.0 * p.kappa - p.dim * p.big_lambda) / p.lambda_plus - p.slack;
    if (!(k > 2.0))
        throw std::invalid_argument("lyapunov_preset_polynomial: exponent k must exceed 2; "
                                    "reduce the slack");

    return LyapunovPreset{
        [k](const SegmentView& seg) { return std::pow(seg.current_norm(), k); },
        rates::RateFunction::power((k - 2.0) / k),
        k,
        std::numeric_limits<double>::quiet_NaN(),
        std::numeric_limits<double>::quiet_NaN(),
        "drift constant not derivable from the coefficients; estimate empirically"};
}

}  // namespace subgeom::chains
