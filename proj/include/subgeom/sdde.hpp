#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "subgeom/rng.hpp"
#include "subgeom/segment.hpp"

namespace subgeom::chains {

/**
 * Coefficients of the delay equation dX(t) = f(X_t) dt + g(X_t) dW(t), with
 * the segment X_t on [t-r, t] as the state.  drift returns a dim-vector,
 * diffusion a dim x wiener_dim matrix flattened row-major.
 */
struct SddeSpec {
    int dim = 1;
    int wiener_dim = 1;
    std::function<std::vector<double>(const SegmentView&)> drift;
    std::function<std::vector<double>(const SegmentView&)> diffusion;
};

/**
 * Inward radial drift f(x) = f1(x) - kappa x(0) |x(0)|^{alpha-2} (the last
 * factor linearized inside |x(0)| < M so the coefficient stays continuous).
 * Outside the ball it satisfies <f(x), x(0)> <= -kappa |x(0)|^alpha, which is
 * what calibrates the convergence rate through alpha.
 */
struct VkDriftParams {
    double kappa;
    double alpha;  // (0, 1]
    double big_m;  // radius beyond which the radial condition is enforced
    int dim = 1;
    std::function<std::vector<double>(const SegmentView&)> f1;  // bounded perturbation, optional
};

/// Strictly increasing bounded positive noise amplitude
/// g(v) = lo + (hi - lo) / (1 + exp(-slope v)).
struct BoundedNoiseParams {
    double lo;
    double hi;
    double slope = 1.0;
};

/// Radial-drift SDDE with caller-supplied diffusion.  Construction samples
/// random segments with |x(0)| >= M and rejects specs violating the radial
/// condition.
SddeSpec vk_drift(const VkDriftParams& params,
                  std::function<std::vector<double>(const SegmentView&)> diffusion,
                  int wiener_dim = 1);

/// Scalar SDDE dX(t) = f(X(t)) dt + g(X(t - r)) dW(t) with the radial drift
/// preset and the bounded increasing noise amplitude evaluated at full lag.
SddeSpec delayed_noise_sdde(const VkDriftParams& drift_params, const BoundedNoiseParams& noise);

/// Worst violation of <f(x), x(0)> + kappa |x(0)|^alpha <= 0 over n random
/// segments with |x(0)| >= big_m (positive = violated).
double vk_condition_violation(const SddeSpec& spec, const SegmentGrid& grid, double kappa,
                              double alpha, double big_m, int n_samples, std::uint64_t seed);

/**
 * Explicit Euler-Maruyama: X(t+dt) = X(t) + f(X_t) dt + g(X_t) sqrt(dt) xi.
 *
 * dt must divide the grid step of x0 (the initial segment is refined by
 * linear interpolation) and horizon must be a multiple of dt.  Returns the
 * terminal segment on the grid of x0.  Throws BlowUpError past |X| = 1e12.
 */
SegmentState sdde_integrate(const SddeSpec& spec, const SegmentState& x0, double horizon,
                            double dt, Rng& rng);

/// Integrate and invoke observe(schedule_index, view) each time the path
/// crosses a schedule point (schedule strictly increasing, multiples of dt).
void sdde_observe(const SddeSpec& spec, const SegmentState& x0, std::span<const double> schedule,
                  double dt, Rng& rng,
                  const std::function<void(std::size_t, const SegmentView&)>& observe);

/// Two paths driven by the same Brownian increments (synchronous coupling).
void sdde_observe_coupled(
    const SddeSpec& spec, const SegmentState& x0, const SegmentState& y0,
    std::span<const double> schedule, double dt, Rng& rng,
    const std::function<void(std::size_t, const SegmentView&, const SegmentView&)>& observe);

}  // namespace subgeom::chains
