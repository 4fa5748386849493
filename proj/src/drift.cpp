#include "subgeom/drift.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace subgeom::lyapunov {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kExactTol = 1e-12;

struct MeanCi {
    double mean;
    double ci95;
};

MeanCi reduce(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    return {mean, kZ95 * std::sqrt(var / static_cast<double>(values.size()))};
}

std::string label_of(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

std::string label_of(const chains::SegmentState& s) {
    char buf[48];
    if (s.dim() == 1)
        std::snprintf(buf, sizeof(buf), "seg(x(0)=%.6g)", s.current_scalar());
    else
        std::snprintf(buf, sizeof(buf), "seg(dim=%d)", s.dim());
    return buf;
}

std::uint64_t stream_id(std::size_t state_index, int sample) {
    return (static_cast<std::uint64_t>(state_index) << 32) | static_cast<std::uint64_t>(sample);
}

}  // namespace

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass:
            return "pass";
        case Verdict::Fail:
            return "fail";
        case Verdict::Inconclusive:
            return "inconclusive";
    }
    return "?";
}

int verdict_exit_code(Verdict v) {
    switch (v) {
        case Verdict::Pass:
            return 0;
        case Verdict::Fail:
            return 1;
        case Verdict::Inconclusive:
            return 2;
    }
    return 1;
}

Verdict combine_verdicts(Verdict a, Verdict b) {
    if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
    if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
    return Verdict::Pass;
}

Verdict verdict_of(double margin, double ci95, double exact_tol) {
    const double band = std::max(3.0 * ci95, exact_tol);
    if (margin < -band) return Verdict::Fail;
    if (margin <= band) return Verdict::Inconclusive;
    return Verdict::Pass;
}

nlohmann::json DriftReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows)
        rows_json.push_back({{"state", row.state},
                             {"V", row.v},
                             {"estimate", row.pv_estimate},
                             {"bound", row.bound},
                             {"margin", row.margin},
                             {"ci95", row.ci95},
                             {"verdict", verdict_name(row.verdict)}});
    return {{"verdict", verdict_name(verdict)},
            {"discretization_warning", discretization_warning},
            {"rows", std::move(rows_json)}};
}

std::string DriftReport::to_table() const {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %12s %12s %12s %12s %10s %s\n", "state", "V",
                  "estimate", "bound", "margin", "ci95", "verdict");
    out << line;
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%-16s %12.6g %12.6g %12.6g %12.6g %10.3g %s\n",
                      row.state.c_str(), row.v, row.pv_estimate, row.bound, row.margin, row.ci95,
                      verdict_name(row.verdict).c_str());
        out << line;
    }
    out << "overall: " << verdict_name(verdict);
    if (discretization_warning) out << "  [discretization warning]";
    out << '\n';
    return out.str();
}

DriftReport check_drift_discrete(const chains::DiscreteModel& model,
                                 const rates::RateFunction& phi, double K,
                                 std::span<const double> states, int n_mc, std::uint64_t seed,
                                 Exec exec) {
    if (!model.lyapunov) throw std::invalid_argument("check_drift_discrete: model has no V");
    if (states.empty()) throw std::invalid_argument("check_drift_discrete: no test states");
    if (n_mc < 100) throw std::invalid_argument("check_drift_discrete: need n_mc >= 100");

    DriftReport report;
    for (std::size_t si = 0; si < states.size(); ++si) {
        const double x = states[si];
        std::vector<double> values(static_cast<std::size_t>(n_mc));
        for_index(n_mc, exec, [&](std::int64_t j) {
            Rng rng(seed, stream_id(si, static_cast<int>(j)));
            values[static_cast<std::size_t>(j)] = model.lyapunov(model.step(x, rng));
        });
        const MeanCi est = reduce(values);
        const double v = model.lyapunov(x);
        const double bound = v - phi(v) + K;
        const double margin = bound - est.mean;
        report.rows.push_back(
            {label_of(x), v, est.mean, bound, margin, est.ci95, verdict_of(margin, est.ci95)});
    }
    report.verdict = Verdict::Pass;
    for (const auto& row : report.rows) report.verdict = combine_verdicts(report.verdict, row.verdict);
    return report;
}

DriftReport check_drift_enumerated(const chains::DiscreteModel& model,
                                   const rates::RateFunction& phi, double K,
                                   std::span<const double> states) {
    if (!model.lyapunov) throw std::invalid_argument("check_drift_enumerated: model has no V");
    if (!model.enumerate_step)
        throw std::invalid_argument("check_drift_enumerated: model has no one-step enumerator");
    if (states.empty()) throw std::invalid_argument("check_drift_enumerated: no test states");

    DriftReport report;
    for (double x : states) {
        double pv = 0.0;
        for (const auto& [y, p] : model.enumerate_step(x)) pv += p * model.lyapunov(y);
        const double v = model.lyapunov(x);
        const double bound = v - phi(v) + K;
        const double margin = bound - pv;
        report.rows.push_back(
            {label_of(x), v, pv, bound, margin, 0.0, verdict_of(margin, 0.0, kExactTol)});
    }
    report.verdict = Verdict::Pass;
    for (const auto& row : report.rows) report.verdict = combine_verdicts(report.verdict, row.verdict);
    return report;
}

namespace {

/// Per-trajectory statistic Y = V(X_t) + int_0^t phi(V(X_u)) du; the drift
/// condition says E[Y] <= V(x) + K t.
std::vector<double> continuous_statistics(const chains::ContinuousModel& model,
                                          const rates::RateFunction& phi,
                                          const chains::SegmentState& x0, double horizon,
                                          int n_mc, double dt, std::uint64_t seed,
                                          std::size_t state_index, Exec exec) {
    const long steps = std::lround(horizon / dt);
    std::vector<double> schedule(static_cast<std::size_t>(steps) + 1);
    for (long s = 0; s <= steps; ++s) schedule[static_cast<std::size_t>(s)] = dt * static_cast<double>(s);

    std::vector<double> stats(static_cast<std::size_t>(n_mc));
    for_index(n_mc, exec, [&](std::int64_t j) {
        Rng rng(seed, stream_id(state_index, static_cast<int>(j)));
        double integral = 0.0;
        double prev_phi_v = 0.0;
        double last_v = 0.0;
        chains::sdde_observe(model.spec, x0, schedule, dt, rng,
                             [&](std::size_t idx, const chains::SegmentView& seg) {
                                 const double v = model.lyapunov(seg);
                                 const double pv = phi(v);
                                 if (idx > 0) integral += 0.5 * (prev_phi_v + pv) * dt;
                                 prev_phi_v = pv;
                                 last_v = v;
                             });
        stats[static_cast<std::size_t>(j)] = last_v + integral;
    });
    return stats;
}

}  // namespace

DriftReport check_drift_continuous(const chains::ContinuousModel& model,
                                   const rates::RateFunction& phi, double K,
                                   std::span<const chains::SegmentState> states, double horizon,
                                   int n_mc, std::uint64_t seed, Exec exec) {
    if (!model.lyapunov) throw std::invalid_argument("check_drift_continuous: model has no V");
    if (states.empty()) throw std::invalid_argument("check_drift_continuous: no test states");
    if (n_mc < 100) throw std::invalid_argument("check_drift_continuous: need n_mc >= 100");
    const double dt = model.dt;
    if (!(dt > 0.0) || std::abs(std::lround(horizon / dt) * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("check_drift_continuous: dt must divide the horizon");

    DriftReport report;
    for (std::size_t si = 0; si < states.size(); ++si) {
        const auto& x0 = states[si];
        const auto stats = continuous_statistics(model, phi, x0, horizon, n_mc, dt, seed, si, exec);
        const MeanCi est = reduce(stats);
        const double v = model.lyapunov_state(x0);
        const double bound = v + K * horizon;
        const double margin = bound - est.mean;

        // halving dt probes the Euler bias in the margin
        chains::ContinuousModel refined = model;
        refined.dt = dt / 2.0;
        const auto stats2 = continuous_statistics(refined, phi, x0, horizon, n_mc, dt / 2.0,
                                                  seed ^ 0x9E3779B97F4A7C15ULL, si, exec);
        const MeanCi est2 = reduce(stats2);
        const double margin2 = bound - est2.mean;

        DriftRow row{label_of(x0), v,      est.mean, bound,
                     margin,       est.ci95, verdict_of(margin, est.ci95)};
        report.rows.push_back(row);
        if (std::abs(margin - margin2) > std::max(est.ci95, est2.ci95))
            report.discretization_warning = true;
    }
    report.verdict = Verdict::Pass;
    for (const auto& row : report.rows) report.verdict = combine_verdicts(report.verdict, row.verdict);
    return report;
}

nlohmann::json CumulativeReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows)
        rows_json.push_back({{"n", row.n},
                             {"lhs", row.lhs_estimate},
                             {"rhs", row.rhs},
                             {"margin", row.margin},
                             {"ci95", row.ci95},
                             {"verdict", verdict_name(row.verdict)}});
    return {{"verdict", verdict_name(verdict)}, {"rows", std::move(rows_json)}};
}

CumulativeReport check_cumulative_drift(const chains::DiscreteModel& model,
                                        const rates::RateFunction& phi, double K, double x, int n,
                                        int n_mc, std::uint64_t seed, Exec exec) {
    if (!model.lyapunov) throw std::invalid_argument("check_cumulative_drift: model has no V");
    if (n < 1) throw std::invalid_argument("check_cumulative_drift: need n >= 1");
    if (n_mc < 2) throw std::invalid_argument("check_cumulative_drift: need n_mc >= 2");

    std::vector<double> sums(static_cast<std::size_t>(n_mc));
    for_index(n_mc, exec, [&](std::int64_t j) {
        Rng rng(seed, static_cast<std::uint64_t>(j));
        double state = x;
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            total += phi(model.lyapunov(state));
            if (i + 1 < n) state = model.step(state, rng);
        }
        sums[static_cast<std::size_t>(j)] = total;
    });
    const MeanCi est = reduce(sums);
    const double rhs = n * K + model.lyapunov(x);
    const double margin = rhs - est.mean;
    CumulativeReport report;
    report.rows.push_back({n, est.mean, rhs, margin, est.ci95, verdict_of(margin, est.ci95)});
    report.verdict = report.rows.front().verdict;
    return report;
}

CumulativeReport check_cumulative_enumerated(const chains::DiscreteModel& model,
                                             const rates::RateFunction& phi, double K, double x,
                                             int n) {
    if (!model.lyapunov) throw std::invalid_argument("check_cumulative_enumerated: model has no V");
    if (!model.enumerate_step)
        throw std::invalid_argument("check_cumulative_enumerated: model has no enumerator");
    if (n < 1 || n > 6) throw std::invalid_argument("check_cumulative_enumerated: need 1 <= n <= 6");

    std::map<double, double> dist{{x, 1.0}};
    double lhs = 0.0;
    for (int i = 0; i < n; ++i) {
        for (const auto& [state, prob] : dist) lhs += prob * phi(model.lyapunov(state));
        if (i + 1 < n) {
            std::map<double, double> next;
            for (const auto& [state, prob] : dist)
                for (const auto& [y, p] : model.enumerate_step(state)) next[y] += prob * p;
            dist = std::move(next);
        }
    }
    const double rhs = n * K + model.lyapunov(x);
    const double margin = rhs - lhs;
    CumulativeReport report;
    report.rows.push_back({n, lhs, rhs, margin, 0.0, verdict_of(margin, 0.0, kExactTol)});
    report.verdict = report.rows.front().verdict;
    return report;
}

DriftConstantEstimate estimate_drift_k(const chains::DiscreteModel& model,
                                       const rates::RateFunction& phi,
                                       std::span<const double> states, int n_mc,
                                       std::uint64_t seed, Exec exec) {
    if (!model.lyapunov) throw std::invalid_argument("estimate_drift_k: model has no V");
    if (states.empty()) throw std::invalid_argument("estimate_drift_k: no states");
    if (n_mc < 100) throw std::invalid_argument("estimate_drift_k: need n_mc >= 100");

    DriftConstantEstimate out{-std::numeric_limits<double>::infinity(), 0.0, ""};
    for (std::size_t si = 0; si < states.size(); ++si) {
        const double x = states[si];
        std::vector<double> values(static_cast<std::size_t>(n_mc));
        for_index(n_mc, exec, [&](std::int64_t j) {
            Rng rng(seed, stream_id(si, static_cast<int>(j)));
            values[static_cast<std::size_t>(j)] = model.lyapunov(model.step(x, rng));
        });
        const MeanCi est = reduce(values);
        const double v = model.lyapunov(x);
        const double k_here = est.mean - v + phi(v);
        if (k_here > out.k_hat) {
            out.k_hat = k_here;
            out.ci95 = est.ci95;
            out.binding_state = label_of(x);
        }
    }
    return out;
}

DriftConstantEstimate estimate_drift_k(const chains::ContinuousModel& model,
                                       const rates::RateFunction& phi,
                                       std::span<const chains::SegmentState> states,
                                       double horizon, int n_mc, std::uint64_t seed, Exec exec) {
    if (!model.lyapunov) throw std::invalid_argument("estimate_drift_k: model has no V");
    if (states.empty()) throw std::invalid_argument("estimate_drift_k: no states");
    if (n_mc < 100) throw std::invalid_argument("estimate_drift_k: need n_mc >= 100");
    if (!(horizon > 0.0)) throw std::invalid_argument("estimate_drift_k: horizon must be positive");

    DriftConstantEstimate out{-std::numeric_limits<double>::infinity(), 0.0, ""};
    for (std::size_t si = 0; si < states.size(); ++si) {
        const auto stats =
            continuous_statistics(model, phi, states[si], horizon, n_mc, model.dt, seed, si, exec);
        const MeanCi est = reduce(stats);
        const double v = model.lyapunov_state(states[si]);
        const double k_here = (est.mean - v) / horizon;
        if (k_here > out.k_hat) {
            out.k_hat = k_here;
            out.ci95 = est.ci95 / horizon;
            out.binding_state = label_of(states[si]);
        }
    }
    return out;
}

}  // namespace subgeom::lyapunov
