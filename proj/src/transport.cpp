#include "subgeom/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "subgeom/errors.hpp"

namespace subgeom::transport {

namespace {

constexpr double kFeasTol = 1e-11;   // residual mass treated as exhausted
constexpr double kFlowTol = 1e-14;   // flow treated as zero
constexpr double kDualTol = 1e-7;    // complementary slackness certificate

double capped_cost(double u, const Metric& metric) {
    switch (metric.kind()) {
        case Metric::Kind::Euclidean:
            return u;
        case Metric::Kind::BoundedEuclidean:
        case Metric::Kind::BoundedSupSegment:
            return std::min(1.0, u / metric.beta());
        case Metric::Kind::Discrete:
            return u > 0.0 ? 1.0 : 0.0;
    }
    return u;
}

}  // namespace

std::vector<double> TransportPlan::source_marginal(std::size_t n) const {
    std::vector<double> out(n, 0.0);
    for (const auto& e : edges) out[static_cast<std::size_t>(e.from)] += e.mass;
    return out;
}

std::vector<double> TransportPlan::target_marginal(std::size_t m) const {
    std::vector<double> out(m, 0.0);
    for (const auto& e : edges) out[static_cast<std::size_t>(e.to)] += e.mass;
    return out;
}

nlohmann::json TransportPlan::to_json() const {
    nlohmann::json edge_list = nlohmann::json::array();
    for (const auto& e : edges)
        edge_list.push_back({{"from", e.from}, {"to", e.to}, {"mass", e.mass}});
    return {{"cost", cost}, {"edges", std::move(edge_list)}};
}

TransportPlan solve_min_cost_flow(const std::vector<std::vector<double>>& cost,
                                  std::vector<double> supply, std::vector<double> demand) {
    const std::size_t n = supply.size();
    const std::size_t m = demand.size();
    if (cost.size() != n) throw std::invalid_argument("solve_min_cost_flow: cost rows != supply");
    for (const auto& row : cost) {
        if (row.size() != m) throw std::invalid_argument("solve_min_cost_flow: ragged cost matrix");
        for (double c : row)
            if (!(c >= 0.0) || !std::isfinite(c))
                throw std::invalid_argument("solve_min_cost_flow: costs must be nonnegative");
    }

    std::vector<std::vector<double>> flow(n, std::vector<double>(m, 0.0));
    std::vector<double> pot(n + m, 0.0);  // node potentials, sources then sinks
    const double inf = std::numeric_limits<double>::infinity();

    double remaining = std::accumulate(supply.begin(), supply.end(), 0.0);
    const std::size_t max_augmentations = n * m + 10 * (n + m) + 16;
    std::size_t rounds = 0;

    std::vector<double> dist(n + m);
    std::vector<int> parent(n + m);
    std::vector<char> done(n + m);

    while (remaining > kFeasTol) {
        if (++rounds > max_augmentations)
            throw NonconvergenceError("solve_min_cost_flow: augmentation budget exhausted");

        // multi-source Dijkstra over the residual graph with reduced costs
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (supply[i] > kFeasTol) dist[i] = 0.0;

        int sink_hit = -1;
        for (;;) {
            int best = -1;
            double best_dist = inf;
            for (std::size_t v = 0; v < n + m; ++v)
                if (!done[v] && dist[v] < best_dist) {
                    best_dist = dist[v];
                    best = static_cast<int>(v);
                }
            if (best < 0) break;
            done[static_cast<std::size_t>(best)] = 1;
            if (best >= static_cast<int>(n) &&
                demand[static_cast<std::size_t>(best) - n] > kFeasTol) {
                sink_hit = best;
                break;
            }
            if (best < static_cast<int>(n)) {
                const std::size_t i = static_cast<std::size_t>(best);
                for (std::size_t j = 0; j < m; ++j) {
                    if (done[n + j]) continue;
                    const double rc = std::max(0.0, cost[i][j] - pot[i] - pot[n + j]);
                    if (dist[i] + rc < dist[n + j]) {
                        dist[n + j] = dist[i] + rc;
                        parent[n + j] = best;
                    }
                }
            } else {
                const std::size_t j = static_cast<std::size_t>(best) - n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (done[i] || flow[i][j] <= kFlowTol) continue;
                    const double rc = std::max(0.0, pot[i] + pot[n + j] - cost[i][j]);
                    if (dist[n + j] + rc < dist[i]) {
                        dist[i] = dist[n + j] + rc;
                        parent[i] = best;
                    }
                }
            }
        }
        if (sink_hit < 0)
            throw NonconvergenceError("solve_min_cost_flow: no augmenting path (infeasible?)");

        // dual update: source potentials drop, sink potentials rise, keeping
        // c_ij - u_i - v_j >= 0 with equality on every arc carrying flow
        const double reached = dist[static_cast<std::size_t>(sink_hit)];
        for (std::size_t v = 0; v < n; ++v) pot[v] -= std::min(dist[v], reached);
        for (std::size_t v = n; v < n + m; ++v) pot[v] += std::min(dist[v], reached);

        // walk the path back to its origin source, collecting the bottleneck
        const std::size_t sink = static_cast<std::size_t>(sink_hit) - n;
        double push = demand[sink];
        int node = sink_hit;
        while (parent[static_cast<std::size_t>(node)] >= 0) {
            const int prev = parent[static_cast<std::size_t>(node)];
            if (node >= static_cast<int>(n)) {
                // forward arc prev(source) -> node(sink): unlimited residual
            } else {
                // backward arc prev(sink) -> node(source): limited by flow
                push = std::min(
                    push, flow[static_cast<std::size_t>(node)][static_cast<std::size_t>(prev) - n]);
            }
            node = prev;
        }
        push = std::min(push, supply[static_cast<std::size_t>(node)]);

        int cur = sink_hit;
        while (parent[static_cast<std::size_t>(cur)] >= 0) {
            const int prev = parent[static_cast<std::size_t>(cur)];
            if (cur >= static_cast<int>(n))
                flow[static_cast<std::size_t>(prev)][static_cast<std::size_t>(cur) - n] += push;
            else
                flow[static_cast<std::size_t>(cur)][static_cast<std::size_t>(prev) - n] -= push;
            cur = prev;
        }
        supply[static_cast<std::size_t>(cur)] -= push;
        demand[sink] -= push;
        remaining -= push;
    }

    TransportPlan plan;
    plan.dual_source.assign(pot.begin(), pot.begin() + static_cast<std::ptrdiff_t>(n));
    plan.dual_target.assign(pot.begin() + static_cast<std::ptrdiff_t>(n), pot.end());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (flow[i][j] > kFlowTol) {
                plan.edges.push_back({static_cast<int>(i), static_cast<int>(j), flow[i][j]});
                total += flow[i][j] * cost[i][j];
            }
    plan.cost = total;
    return plan;
}

namespace {

void certify_plan(const TransportPlan& plan, const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    const std::size_t m = cost.empty() ? 0 : cost.front().size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (cost[i][j] - plan.dual_source[i] - plan.dual_target[j] < -kDualTol)
                throw NonconvergenceError("optimal transport: dual feasibility violated");
    for (const auto& e : plan.edges) {
        const double slack = cost[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(
                                 e.to)] -
                             plan.dual_source[static_cast<std::size_t>(e.from)] -
                             plan.dual_target[static_cast<std::size_t>(e.to)];
        if (std::abs(slack) > kDualTol)
            throw NonconvergenceError("optimal transport: complementary slackness violated");
    }
}

std::pair<double, TransportPlan> solve_measures(
    const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
    const std::function<double(const Point&, const Point&)>& cost_fn) {
    if (static_cast<double>(mu.size()) * static_cast<double>(nu.size()) > 1e6)
        throw std::invalid_argument("wasserstein_exact: instance above the 1e6 size guard");
    std::vector<std::vector<double>> cost(mu.size(), std::vector<double>(nu.size()));
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) cost[i][j] = cost_fn(mu.point(i), nu.point(j));
    TransportPlan plan = solve_min_cost_flow(cost, mu.weights(), nu.weights());
    certify_plan(plan, cost);
    return {plan.cost, std::move(plan)};
}

}  // namespace

std::pair<double, TransportPlan> wasserstein_exact(const EmpiricalMeasure& mu,
                                                   const EmpiricalMeasure& nu,
                                                   const Metric& metric) {
    return solve_measures(mu, nu,
                          [&metric](const Point& x, const Point& y) { return metric(x, y); });
}

std::pair<double, TransportPlan> wasserstein_with_cost(
    const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
    const std::function<double(const Point&, const Point&)>& cost) {
    return solve_measures(mu, nu, cost);
}

double wasserstein_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                      const Metric& metric) {
    if (mu.dim() != 1 || nu.dim() != 1)
        throw std::invalid_argument("wasserstein_1d: states must be scalar");
    if (metric.kind() == Metric::Kind::Discrete) return 0.5 * tv_distance(mu, nu);

    auto sorted_indices = [](const EmpiricalMeasure& m) {
        std::vector<std::size_t> idx(m.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&m](std::size_t a, std::size_t b) { return m.scalar(a) < m.scalar(b); });
        return idx;
    };
    const auto ia = sorted_indices(mu);
    const auto ib = sorted_indices(nu);

    double total = 0.0;
    std::size_t a = 0, b = 0;
    double wa = mu.weight(ia[0]);
    double wb = nu.weight(ib[0]);
    while (a < ia.size() && b < ib.size()) {
        const double step = std::min(wa, wb);
        if (step > 0.0) {
            const double u = std::abs(mu.scalar(ia[a]) - nu.scalar(ib[b]));
            total += step * capped_cost(u, metric);
        }
        wa -= step;
        wb -= step;
        if (wa <= 1e-15) {
            if (++a < ia.size()) wa = mu.weight(ia[a]);
        }
        if (wb <= 1e-15) {
            if (++b < ib.size()) wb = nu.weight(ib[b]);
        }
    }
    return total;
}

double tv_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    std::map<Point, double> diff;
    for (std::size_t i = 0; i < mu.size(); ++i) diff[mu.point(i)] += mu.weight(i);
    for (std::size_t j = 0; j < nu.size(); ++j) diff[nu.point(j)] -= nu.weight(j);
    // Kahan summation: supports can hold 10^5+ atoms of mass ~1/|support|
    double total = 0.0, carry = 0.0;
    for (const auto& [point, mass] : diff) {
        const double y = std::abs(mass) - carry;
        const double t = total + y;
        carry = (t - total) - y;
        total = t;
    }
    return total;
}

double wasserstein_to_uniform01(const EmpiricalMeasure& mu, const Metric& metric) {
    if (mu.dim() != 1) throw std::invalid_argument("wasserstein_to_uniform01: states must be scalar");
    if (metric.kind() != Metric::Kind::Euclidean && metric.kind() != Metric::Kind::BoundedEuclidean)
        throw std::invalid_argument(
            "wasserstein_to_uniform01: supports euclidean and bounded-euclidean costs");

    std::vector<std::size_t> idx(mu.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&mu](std::size_t a, std::size_t b) { return mu.scalar(a) < mu.scalar(b); });

    // int_a^b cost(|v - q|) dq in closed form
    auto segment_cost = [&metric](double v, double a, double b) {
        auto one_side = [&metric](double lo, double hi) {
            // integral of cost(u) du over [lo, hi], 0 <= lo <= hi
            if (metric.kind() == Metric::Kind::Euclidean) return 0.5 * (hi * hi - lo * lo);
            const double beta = metric.beta();
            const double cap_lo = std::min(lo, beta);
            const double cap_hi = std::min(hi, beta);
            double total = 0.5 * (cap_hi * cap_hi - cap_lo * cap_lo) / beta;
            if (hi > beta) total += hi - std::max(lo, beta);
            return total;
        };
        double total = 0.0;
        if (v > a) total += one_side(std::max(0.0, v - std::min(b, v)), v - a);
        if (v < b) total += one_side(std::max(0.0, std::max(a, v) - v), b - v);
        return total;
    };

    double total = 0.0;
    double level = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double w = mu.weight(idx[k]);
        if (w <= 0.0) continue;
        total += segment_cost(mu.scalar(idx[k]), level, level + w);
        level += w;
    }
    return total;
}

MonteCarloEstimate coupling_upper_bound(
    const std::function<std::pair<Point, Point>(Rng&)>& coupled_sampler, const Metric& metric,
    int n_samples, std::uint64_t seed, Exec exec) {
    if (n_samples < 2) throw std::invalid_argument("coupling_upper_bound: need n_samples >= 2");
    std::vector<double> values(static_cast<std::size_t>(n_samples));
    for_index(n_samples, exec, [&](std::int64_t i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        const auto [x, y] = coupled_sampler(rng);
        values[static_cast<std::size_t>(i)] = metric(x, y);
    });
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n_samples;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (n_samples - 1);
    MonteCarloEstimate est;
    est.mean = mean;
    est.ci95 = 1.959963984540054 * std::sqrt(var / n_samples);
    est.n = n_samples;
    est.ci_reliable = n_samples >= 100;
    return est;
}

}  // namespace subgeom::transport
