#include "subgeom/rates.hpp"

#include <cmath>
#include <stdexcept>

#include "subgeom/errors.hpp"
#include "subgeom/quadrature.hpp"

namespace subgeom::rates {

namespace {
constexpr double kE2 = 7.389056098930650227230427460575;  // e^2
}

RateFunction RateFunction::linear(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("RateFunction::linear: lambda must be positive");
    RateFunction f;
    f.kind_ = Kind::Linear;
    f.param_ = lambda;
    return f;
}

RateFunction RateFunction::power(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("RateFunction::power: gamma must lie in (0,1)");
    RateFunction f;
    f.kind_ = Kind::Power;
    f.param_ = gamma;
    return f;
}

RateFunction RateFunction::log_power(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("RateFunction::log_power: alpha must lie in (0,1]");
    const double s0 = std::exp(std::max(2.0, (2.0 - alpha) / alpha));
    return log_power(alpha, s0);
}

RateFunction RateFunction::log_power(double alpha, double s0) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("RateFunction::log_power: alpha must lie in (0,1]");
    if (!(s0 >= kE2 * (1.0 - 1e-12)))
        throw std::invalid_argument("RateFunction::log_power: splice point must be >= e^2");
    const double m = (2.0 * alpha - 2.0) / alpha;
    const double ls = std::log(s0);
    // the branch u (ln u)^m is increasing and concave only for ln u >= 1 - m
    if (ls < (1.0 - m) * (1.0 - 1e-12))
        throw std::invalid_argument(
            "RateFunction::log_power: splice point too small for this alpha; "
            "need ln(s0) >= (2-alpha)/alpha");
    RateFunction f;
    f.kind_ = Kind::LogPower;
    f.param_ = alpha;
    f.log_exponent_ = m;
    f.s0_ = s0;
    f.slope_ = std::pow(ls, m - 1.0) * (ls + m);
    f.shift_ = f.slope_ * s0 - s0 * std::pow(ls, m);
    return f;
}

RateFunction RateFunction::custom(std::function<double(double)> phi,
                                  std::function<double(double)> dphi) {
    if (!phi || !dphi) throw std::invalid_argument("RateFunction::custom: null callable");
    RateFunction f;
    f.kind_ = Kind::Custom;
    f.phi_ = std::move(phi);
    f.dphi_ = std::move(dphi);
    return f;
}

RateFunction RateFunction::from_json(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "linear") return linear(spec.at("lambda").get<double>());
    if (kind == "power") return power(spec.at("gamma").get<double>());
    if (kind == "logpower") {
        const double alpha = spec.at("alpha").get<double>();
        if (spec.contains("s0")) return log_power(alpha, spec.at("s0").get<double>());
        return log_power(alpha);
    }
    throw std::invalid_argument("RateFunction::from_json: unknown kind '" + kind + "'");
}

RateFunction RateFunction::parse(std::string_view token) {
    const auto colon = token.find(':');
    const std::string kind(token.substr(0, colon));
    double value = 1.0;
    if (colon != std::string_view::npos) value = std::stod(std::string(token.substr(colon + 1)));
    if (kind == "linear") return linear(value);
    if (kind == "power") return power(value);
    if (kind == "logpower") return log_power(value);
    throw std::invalid_argument("RateFunction::parse: unknown rate spec '" + std::string(token) +
                                "'");
}

double RateFunction::operator()(double u) const {
    if (!(u >= 0.0)) throw std::domain_error("RateFunction: argument must be >= 0");
    switch (kind_) {
        case Kind::Linear:
            return param_ * u;
        case Kind::Power:
            return std::pow(u, param_);
        case Kind::LogPower:
            if (u <= s0_) return slope_ * u;
            return u * std::pow(std::log(u), log_exponent_) + shift_;
        case Kind::Custom:
            return phi_(u);
    }
    return 0.0;
}

double RateFunction::derivative(double u) const {
    if (!(u >= 0.0)) throw std::domain_error("RateFunction: argument must be >= 0");
    switch (kind_) {
        case Kind::Linear:
            return param_;
        case Kind::Power:
            return param_ * std::pow(u, param_ - 1.0);
        case Kind::LogPower: {
            if (u <= s0_) return slope_;
            const double lu = std::log(u);
            return std::pow(lu, log_exponent_ - 1.0) * (lu + log_exponent_);
        }
        case Kind::Custom:
            return dphi_(u);
    }
    return 0.0;
}

double RateFunction::inverse(double y) const {
    if (!(y >= 0.0)) throw std::domain_error("RateFunction::inverse: argument must be >= 0");
    switch (kind_) {
        case Kind::Linear:
            return y / param_;
        case Kind::Power:
            return std::pow(y, 1.0 / param_);
        case Kind::LogPower: {
            const double at_splice = slope_ * s0_;
            if (y <= at_splice) return y / slope_;
            return quadrature::invert_increasing([this](double u) { return (*this)(u); }, y, s0_);
        }
        case Kind::Custom:
            return quadrature::invert_increasing(phi_, y, 0.0);
    }
    return 0.0;
}

std::string RateFunction::describe() const {
    switch (kind_) {
        case Kind::Linear:
            return "linear:" + std::to_string(param_);
        case Kind::Power:
            return "power:" + std::to_string(param_);
        case Kind::LogPower:
            return "logpower:" + std::to_string(param_);
        case Kind::Custom:
            return "custom";
    }
    return "?";
}

RateBoundParams::RateBoundParams(double c1_in, double c2_in, double epsilon_in, double v_in)
    : c1(c1_in), c2(c2_in), epsilon(epsilon_in), v_of_x(v_in) {
    if (!(c1 > 0.0) || !std::isfinite(c1))
        throw std::invalid_argument("RateBoundParams: C1 must be positive and finite");
    if (!(c2 > 0.0) || !std::isfinite(c2))
        throw std::invalid_argument("RateBoundParams: C2 must be positive and finite");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("RateBoundParams: epsilon must lie strictly inside (0,1)");
    if (!(v_of_x >= 0.0) || !std::isfinite(v_of_x))
        throw std::invalid_argument("RateBoundParams: V(x) must be nonnegative and finite");
}

double h_transform(const RateFunction& phi, double x) {
    if (!(x >= 1.0)) throw std::domain_error("h_transform: x must be >= 1");
    switch (phi.kind()) {
        case RateFunction::Kind::Linear:
            return std::log(x) / phi.param();
        case RateFunction::Kind::Power: {
            const double g = phi.param();
            return (std::pow(x, 1.0 - g) - 1.0) / (1.0 - g);
        }
        default:
            return h_transform_quadrature(phi, x);
    }
}

double h_transform_quadrature(const RateFunction& phi, double x) {
    if (!(x >= 1.0)) throw std::domain_error("h_transform: x must be >= 1");
    if (x == 1.0) return 0.0;
    return quadrature::integrate([&phi](double u) { return 1.0 / phi(u); }, 1.0, x);
}

double h_inverse(const RateFunction& phi, double y) {
    if (!(y >= 0.0)) throw std::domain_error("h_inverse: y must be >= 0");
    switch (phi.kind()) {
        case RateFunction::Kind::Linear:
            return std::exp(phi.param() * y);
        case RateFunction::Kind::Power: {
            const double g = phi.param();
            return std::pow(1.0 + (1.0 - g) * y, 1.0 / (1.0 - g));
        }
        default:
            return h_inverse_bisection(phi, y);
    }
}

double h_inverse_bisection(const RateFunction& phi, double y) {
    if (!(y >= 0.0)) throw std::domain_error("h_inverse: y must be >= 0");
    if (y == 0.0) return 1.0;
    return quadrature::invert_increasing(
        [&phi](double x) { return h_transform_quadrature(phi, x); }, y, 1.0);
}

double rate_bound(const RateFunction& phi, const RateBoundParams& params, double t) {
    if (!(t >= 0.0)) throw std::domain_error("rate_bound: t must be >= 0");
    const double x = h_inverse(phi, params.c2 * t);
    const double rate = phi(x);
    return params.c1 * (1.0 + params.v_of_x) * std::pow(rate, -(1.0 - params.epsilon));
}

AsymptoticFamily rate_asymptotics(const RateFunction& phi, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw std::invalid_argument("rate_asymptotics: epsilon must lie in [0,1)");
    switch (phi.kind()) {
        case RateFunction::Kind::Linear:
            return {RateFamily::Geometric, phi.param() * (1.0 - epsilon)};
        case RateFunction::Kind::Power: {
            const double g = phi.param();
            return {RateFamily::Polynomial, -g * (1.0 - epsilon) / (1.0 - g)};
        }
        case RateFunction::Kind::LogPower: {
            const double a = phi.param();
            if (a == 1.0) return {RateFamily::Geometric, 1.0 - epsilon};
            return {RateFamily::Subexponential, a / (2.0 - a)};
        }
        case RateFunction::Kind::Custom:
            throw std::invalid_argument("rate_asymptotics: unsupported for custom rate functions");
    }
    throw std::invalid_argument("rate_asymptotics: unknown kind");
}

std::string family_name(RateFamily family) {
    switch (family) {
        case RateFamily::Geometric:
            return "geometric";
        case RateFamily::Polynomial:
            return "polynomial";
        case RateFamily::Subexponential:
            return "subexponential";
    }
    return "?";
}

}  // namespace subgeom::rates
