#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "subgeom/measure.hpp"
#include "subgeom/metrics.hpp"
#include "subgeom/parallel.hpp"
#include "subgeom/rng.hpp"

namespace subgeom::transport {

struct PlanEdge {
    int from;
    int to;
    double mass;
};

/// An optimal coupling between two empirical measures together with the dual
/// potentials certifying optimality by complementary slackness.
struct TransportPlan {
    std::vector<PlanEdge> edges;
    double cost = 0.0;
    std::vector<double> dual_source;
    std::vector<double> dual_target;

    std::vector<double> source_marginal(std::size_t n) const;
    std::vector<double> target_marginal(std::size_t m) const;
    nlohmann::json to_json() const;
};

/**
 * Exact discrete optimal transport by successive shortest augmenting paths
 * with node potentials (a min-cost-flow specialization to the dense
 * bipartite transportation problem).  Cost entries must be nonnegative.
 */
TransportPlan solve_min_cost_flow(const std::vector<std::vector<double>>& cost,
                                  std::vector<double> supply, std::vector<double> demand);

/**
 * Exact Wasserstein distance W_d(mu, nu) and an optimal plan.
 *
 * Guarded to size(mu) * size(nu) <= 1e6.  The returned plan's marginals
 * reproduce the input weights; coincident support points are not merged, so
 * callers holding heavily duplicated samples should deduplicate first.
 * Throws NonconvergenceError if the dual certificate fails at 1e-7.
 */
std::pair<double, TransportPlan> wasserstein_exact(const EmpiricalMeasure& mu,
                                                   const EmpiricalMeasure& nu,
                                                   const Metric& metric);

/// Same solver under an arbitrary nonnegative cost c(x, y) (used for the
/// auxiliary semimetric of the contraction analysis).
std::pair<double, TransportPlan> wasserstein_with_cost(
    const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
    const std::function<double(const Point&, const Point&)>& cost);

/**
 * W_d between 1-D measures via the monotone (quantile) coupling.
 *
 * Exact for the raw Euclidean cost.  For the capped cost min(1, |u|/beta) it
 * returns the monotone-coupling value, which is exact whenever the merged
 * support has diameter <= beta and an upper bound otherwise; use
 * wasserstein_exact when the capped cost must be exact on wide supports.
 * The discrete metric is routed through tv_distance / 2.
 * Ties are broken by the stable order of the input points.
 */
double wasserstein_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                      const Metric& metric);

/// Total variation distance sum_s |mu(s) - nu(s)| over the merged support
/// (the measure-theoretic d_TV for discrete measures; equals
/// 2 W_{d0}(mu, nu)).
double tv_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Exact W between a 1-D empirical measure and the uniform law on [0,1),
/// via the quantile coupling with the cost integrated in closed form.
/// Supports the Euclidean and BoundedEuclidean costs.
double wasserstein_to_uniform01(const EmpiricalMeasure& mu, const Metric& metric);

struct MonteCarloEstimate {
    double mean = 0.0;
    double ci95 = 0.0;
    int n = 0;
    bool ci_reliable = true;  // normal-approximation CI; flagged for n < 100
};

/**
 * Monte Carlo mean of d(X, Y) over pairs drawn from a coupling; any coupling
 * upper-bounds W_d.  Sample i uses the stream (seed, i), so the estimate is
 * independent of the execution policy and worker count.
 */
MonteCarloEstimate coupling_upper_bound(
    const std::function<std::pair<Point, Point>(Rng&)>& coupled_sampler, const Metric& metric,
    int n_samples, std::uint64_t seed, Exec exec = Exec::Parallel);

}  // namespace subgeom::transport
