#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "subgeom/models.hpp"
#include "subgeom/parallel.hpp"
#include "subgeom/rates.hpp"

namespace subgeom::lyapunov {

/// Three-valued outcome of a statistical inequality check: fail only when the
/// margin is below -3 ci95, inconclusive while |margin| <= 3 ci95.
enum class Verdict { Pass, Fail, Inconclusive };

std::string verdict_name(Verdict v);
int verdict_exit_code(Verdict v);  // 0 pass, 1 fail, 2 inconclusive
Verdict combine_verdicts(Verdict a, Verdict b);
Verdict verdict_of(double margin, double ci95, double exact_tol = 0.0);

struct DriftRow {
    std::string state;
    double v;
    double pv_estimate;  // estimated E[V(X_1)] (or E V(X_t) + E int phi(V) in continuous time)
    double bound;        // V - phi(V) + K (or V + K t)
    double margin;       // bound - estimate; positive is good
    double ci95;
    Verdict verdict;
};

struct DriftReport {
    std::vector<DriftRow> rows;
    Verdict verdict = Verdict::Pass;
    bool discretization_warning = false;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

/**
 * Monte Carlo check of the drift inequality PV <= V - phi(V) + K at each
 * test state.  n_mc >= 100; sample j of state i uses stream (i << 32) | j.
 */
DriftReport check_drift_discrete(const chains::DiscreteModel& model,
                                 const rates::RateFunction& phi, double K,
                                 std::span<const double> states, int n_mc, std::uint64_t seed,
                                 Exec exec = Exec::Parallel);

/// Exact version of the discrete check via the model's one-step enumerator;
/// margins carry only float rounding (ci95 = 0).
DriftReport check_drift_enumerated(const chains::DiscreteModel& model,
                                   const rates::RateFunction& phi, double K,
                                   std::span<const double> states);

/**
 * Continuous-time drift check
 *   E_x V(X_t) <= V(x) - E_x int_0^t phi(V(X_u)) du + K t,
 * with the integral accumulated by the trapezoidal rule along each Euler
 * trajectory.  The check reruns at dt/2 and attaches a discretization
 * warning when that moves any margin by more than one ci95.
 */
DriftReport check_drift_continuous(const chains::ContinuousModel& model,
                                   const rates::RateFunction& phi, double K,
                                   std::span<const chains::SegmentState> states, double horizon,
                                   int n_mc, std::uint64_t seed, Exec exec = Exec::Parallel);

struct CumulativeRow {
    int n;
    double lhs_estimate;  // sum_{i<n} E_x phi(V(X_i))
    double rhs;           // n K + V(x)
    double margin;
    double ci95;
    Verdict verdict;
};

struct CumulativeReport {
    std::vector<CumulativeRow> rows;
    Verdict verdict = Verdict::Pass;

    nlohmann::json to_json() const;
};

/// Monte Carlo check of the cumulative inequality
/// sum_{i=0}^{n-1} P^i(phi o V)(x) <= n K + V(x).
CumulativeReport check_cumulative_drift(const chains::DiscreteModel& model,
                                        const rates::RateFunction& phi, double K, double x, int n,
                                        int n_mc, std::uint64_t seed, Exec exec = Exec::Parallel);

/// Exact cumulative sum by propagating the full outcome distribution
/// (needs the enumerator; feasible for n <= 6 on ten-outcome kernels).
CumulativeReport check_cumulative_enumerated(const chains::DiscreteModel& model,
                                             const rates::RateFunction& phi, double K, double x,
                                             int n);

struct DriftConstantEstimate {
    double k_hat;   // smallest K making the drift inequality hold on the states
    double ci95;    // ci at the binding state
    std::string binding_state;
};

/// Empirical K: max over states of PV - V + phi(V), with its sampling error.
DriftConstantEstimate estimate_drift_k(const chains::DiscreteModel& model,
                                       const rates::RateFunction& phi,
                                       std::span<const double> states, int n_mc,
                                       std::uint64_t seed, Exec exec = Exec::Parallel);

/// Continuous-time analogue: max over states of
/// (E V(X_t) + E int phi(V) - V(x)) / t.
DriftConstantEstimate estimate_drift_k(const chains::ContinuousModel& model,
                                       const rates::RateFunction& phi,
                                       std::span<const chains::SegmentState> states,
                                       double horizon, int n_mc, std::uint64_t seed,
                                       Exec exec = Exec::Parallel);

}  // namespace subgeom::lyapunov
