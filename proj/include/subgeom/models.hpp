#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subgeom/measure.hpp"
#include "subgeom/parallel.hpp"
#include "subgeom/rates.hpp"
#include "subgeom/rng.hpp"
#include "subgeom/sdde.hpp"

namespace subgeom::chains {

/**
 * Discrete-time Markov model on scalar states.  step must be a pure function
 * of (state, rng stream).  enumerate_step, when present, lists the exact
 * one-step outcome distribution and unlocks the exact verification paths.
 */
struct DiscreteModel {
    std::string name;
    std::function<double(double, Rng&)> step;
    std::function<std::vector<std::pair<double, double>>(double)> enumerate_step;  // (state, prob)
    std::function<double(double)> lyapunov;  // V, optional
    bool analytic_uniform01_limit = false;   // invariant law is Uniform[0,1)
};

/// The digit-shift chain with its exact 10-outcome enumerator.
DiscreteModel make_digit_chain();

/// Chain whose next state ignores the current one (X_1 = eps); every pair of
/// one-step kernels coincides, so any set is d-small at full strength.
DiscreteModel make_independent_noise_chain();

/// Continuous-time model: an SDDE with its integration step and optional
/// Lyapunov functional.
struct ContinuousModel {
    std::string name;
    SddeSpec spec;
    SegmentGrid grid;
    double dt;
    std::function<double(const SegmentView&)> lyapunov;  // optional

    double lyapunov_state(const SegmentState& s) const {
        const SegmentView view{s.values().data(), s.grid().points(), s.dim(), s.grid().dt()};
        return lyapunov(view);
    }
};

/// n-step marginal of a discrete model as an equal-weight sample; trajectory
/// i draws from the stream (seed, i).
transport::EmpiricalMeasure sample_marginal(const DiscreteModel& model, double x0, int n_steps,
                                            int n_samples, std::uint64_t seed,
                                            Exec exec = Exec::Parallel);

enum class SddeObservable { Segment, CurrentValue };

/// Time-t marginal of an SDDE; the observable is the whole segment
/// (flattened on its grid) or the projection to the current value.
transport::EmpiricalMeasure sample_marginal(const ContinuousModel& model, const SegmentState& x0,
                                            double horizon, int n_samples, std::uint64_t seed,
                                            SddeObservable observable = SddeObservable::Segment,
                                            Exec exec = Exec::Parallel);

/// Exact n-step marginal of the digit chain (all 10^n outcomes).
transport::EmpiricalMeasure exact_digit_marginal(double x0, int n_steps);

/**
 * Lyapunov function / rate function pairs matching the radial-drift rates.
 *
 * Case alpha in (0,1]:  V(x) = exp(k |x(0)|^alpha) beyond a threshold M0,
 *                       k = kappa / (2 lambda_plus alpha), bridged to 0 by a
 *                       C^2 quintic below M0; phi is the log-power rate at
 *                       the same alpha (linear when alpha = 1).
 * Case alpha = 0:       V(x) = |x(0)|^k with
 *                       k = 2 + (2 kappa - n Lambda)/lambda_plus - slack,
 *                       requiring kappa > n Lambda / 2; phi(u) = u^{(k-2)/k}.
 *
 * The drift constant is not derivable from the coefficients, so k_hint is
 * NaN and callers estimate K empirically.
 */
struct LyapunovPreset {
    std::function<double(const SegmentView&)> V;
    rates::RateFunction phi;
    double exponent_k;
    double threshold_m0;  // NaN for the polynomial case
    double k_hint;        // always NaN: estimate the drift constant empirically
    std::string note;
};

struct ExponentialPresetParams {
    double alpha;        // (0, 1]
    double kappa;        // radial drift strength
    double lambda_plus;  // sup of the radial diffusion quadratic form
    double big_lambda;   // sup of Tr(g g^T)/n
    double big_m;        // radius from the drift condition
    int dim = 1;
};

struct PolynomialPresetParams {
    double kappa;
    double lambda_plus;
    double big_lambda;
    double slack = 0.1;  // the epsilon subtracted from the exponent
    int dim = 1;
};

LyapunovPreset lyapunov_preset_exponential(const ExponentialPresetParams& p);
LyapunovPreset lyapunov_preset_polynomial(const PolynomialPresetParams& p);

}  // namespace subgeom::chains
