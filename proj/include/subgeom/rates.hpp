#pragma once

#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace subgeom::rates {

/**
 * A concave, differentiable rate function phi: [0, inf) -> [0, inf) with
 * phi(0) = 0, strictly increasing to infinity.  These functions drive both
 * the Lyapunov drift inequality PV <= V - phi(V) + K and the convergence
 * bound C1 (1 + V(x)) / phi(H^{-1}(C2 t))^{1-eps}.
 *
 * Built-in families:
 *   linear(lambda)   phi(u) = lambda u                      -> geometric rates
 *   power(gamma)     phi(u) = u^gamma, gamma in (0,1)       -> polynomial rates
 *   log_power(alpha) phi(u) = u (ln u)^{(2a-2)/a} beyond a
 *                    splice point s0, linear below           -> subexponential rates
 *
 * The log-power branch is only concave and increasing for ln u >= (2-a)/a,
 * so the splice point defaults to exp(max(2, (2-a)/a)).  The linear segment
 * through the origin uses the branch slope at s0 and the branch is shifted
 * by a constant so the two pieces meet with matching value and slope (C^1).
 */
class RateFunction {
  public:
    enum class Kind { Linear, Power, LogPower, Custom };

    static RateFunction linear(double lambda);
    static RateFunction power(double gamma);
    static RateFunction log_power(double alpha);
    static RateFunction log_power(double alpha, double s0);
    static RateFunction custom(std::function<double(double)> phi,
                               std::function<double(double)> dphi);

    /// Build from a config fragment such as {"kind":"power","gamma":0.5}.
    static RateFunction from_json(const nlohmann::json& spec);
    /// Parse a compact CLI token: "linear:1.0", "power:0.5", "logpower:0.6".
    static RateFunction parse(std::string_view token);

    double operator()(double u) const;
    double derivative(double u) const;
    double inverse(double y) const;

    Kind kind() const { return kind_; }
    /// lambda / gamma / alpha for the built-in kinds.
    double param() const { return param_; }
    double splice_point() const { return s0_; }

    std::string describe() const;

  private:
    RateFunction() = default;

    Kind kind_ = Kind::Custom;
    double param_ = 0.0;
    double s0_ = 0.0;            // LogPower splice point
    double slope_ = 0.0;         // LogPower linear-segment slope
    double shift_ = 0.0;         // LogPower branch offset
    double log_exponent_ = 0.0;  // (2 alpha - 2) / alpha
    std::function<double(double)> phi_, dphi_;
};

/// Parameters of the convergence bound; the constants are fit or supplied,
/// never derived (the underlying theory does not exhibit them).
struct RateBoundParams {
    double c1;
    double c2;
    double epsilon;  // strictly inside (0, 1)
    double v_of_x;   // V at the initial state

    RateBoundParams(double c1, double c2, double epsilon, double v_of_x);
};

/// H_phi(x) = int_1^x du / phi(u), x >= 1.  Closed form for Linear/Power,
/// adaptive quadrature otherwise.
double h_transform(const RateFunction& phi, double x);

/// Always-quadrature route of h_transform; the closed forms are cross-checked
/// against it.
double h_transform_quadrature(const RateFunction& phi, double x);

/// Inverse of H_phi; closed form for Linear/Power, bracketing bisection
/// otherwise.  h_transform(phi, h_inverse(phi, y)) == y to 1e-9 * max(1, y).
double h_inverse(const RateFunction& phi, double y);

/// Always-numeric route of h_inverse.
double h_inverse_bisection(const RateFunction& phi, double y);

/// The subgeometric bound C1 (1 + V(x)) * phi(H^{-1}(C2 t))^{-(1-eps)}.
double rate_bound(const RateFunction& phi, const RateBoundParams& params, double t);

enum class RateFamily { Geometric, Polynomial, Subexponential };

/// Asymptotic decay family of the bound for a built-in phi.
///
/// Geometric:      bound ~ exp(-exponent * C2 * t)
/// Polynomial:     bound ~ t^exponent            (exponent < 0)
/// Subexponential: bound ~ exp(-c * t^exponent)  (exponent in (0,1))
struct AsymptoticFamily {
    RateFamily family;
    double exponent;
};

AsymptoticFamily rate_asymptotics(const RateFunction& phi, double epsilon);

std::string family_name(RateFamily family);

}  // namespace subgeom::rates
