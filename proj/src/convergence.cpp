#include "subgeom/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "subgeom/digit_chain.hpp"
#include "subgeom/errors.hpp"
#include "subgeom/transport.hpp"

namespace subgeom::harness {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct MeanCi {
    double mean;
    double ci95;
};

MeanCi reduce(std::span<const double> values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= std::max<std::size_t>(1, values.size() - 1);
    return {mean, kZ95 * std::sqrt(var / static_cast<double>(values.size()))};
}

std::vector<long> integer_schedule(std::span<const double> schedule) {
    std::vector<long> steps;
    steps.reserve(schedule.size());
    for (double t : schedule) {
        const long n = std::lround(t);
        if (std::abs(t - static_cast<double>(n)) > 1e-9 || n < 0)
            throw std::invalid_argument("digit-chain schedules must hold nonnegative integers");
        steps.push_back(n);
    }
    return steps;
}

// ---- digit-chain experiments ------------------------------------------------

ConvergenceCurve digit_two_start(const ExperimentConfig& cfg) {
    const auto steps = integer_schedule(cfg.schedule);
    const long max_n = steps.empty() ? 0 : steps.back();
    ConvergenceCurve curve;
    curve.reference = "two-start-coupling";

    if (cfg.n_samples == 0) {
        // the synchronously coupled pair is deterministic through the metric:
        // shared digits cancel, so any digit path gives the same distance
        double x = cfg.x0, y = cfg.y0;
        std::size_t next = 0;
        for (long n = 0; n <= max_n; ++n) {
            while (next < steps.size() && steps[next] == n) {
                const double d = cfg.metric(transport::Point{x}, transport::Point{y});
                curve.rows.push_back({static_cast<double>(n), d, 0.0,
                                      std::numeric_limits<double>::quiet_NaN()});
                ++next;
            }
            x = chains::digit_step_with(x, 0);
            y = chains::digit_step_with(y, 0);
        }
        return curve;
    }

    std::vector<std::vector<double>> dist(static_cast<std::size_t>(cfg.n_samples),
                                          std::vector<double>(steps.size()));
    for_index(cfg.n_samples, cfg.exec, [&](std::int64_t i) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(i));
        double x = cfg.x0, y = cfg.y0;
        std::size_t next = 0;
        for (long n = 0; n <= max_n; ++n) {
            while (next < steps.size() && steps[next] == n) {
                dist[static_cast<std::size_t>(i)][next] =
                    cfg.metric(transport::Point{x}, transport::Point{y});
                ++next;
            }
            const int digit = static_cast<int>(rng.below(10));
            x = chains::digit_step_with(x, digit);
            y = chains::digit_step_with(y, digit);
        }
    });
    for (std::size_t k = 0; k < steps.size(); ++k) {
        std::vector<double> column(static_cast<std::size_t>(cfg.n_samples));
        for (std::size_t i = 0; i < column.size(); ++i) column[i] = dist[i][k];
        const MeanCi est = reduce(column);
        curve.rows.push_back({static_cast<double>(steps[k]), est.mean, est.ci95,
                              std::numeric_limits<double>::quiet_NaN()});
    }
    return curve;
}

ConvergenceCurve digit_vs_uniform(const ExperimentConfig& cfg) {
    const auto steps = integer_schedule(cfg.schedule);
    ConvergenceCurve curve;
    curve.reference = "analytic-uniform01";

    if (cfg.n_samples == 0) {
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (steps[k] > 7)
                throw std::invalid_argument("exact digit enumeration supports n <= 7");
            const auto marginal = chains::exact_digit_marginal(cfg.x0, static_cast<int>(steps[k]));
            const double d = transport::wasserstein_to_uniform01(marginal, cfg.metric);
            curve.rows.push_back({static_cast<double>(steps[k]), d, 0.0,
                                  std::numeric_limits<double>::quiet_NaN()});
        }
        return curve;
    }

    const auto model = chains::make_digit_chain();
    constexpr int kBatches = 8;
    const int per_batch = std::max(2, cfg.n_samples / kBatches);
    for (std::size_t k = 0; k < steps.size(); ++k) {
        std::vector<double> estimates;
        for (int b = 0; b < kBatches; ++b) {
            Rng derive(cfg.seed, 7777 + static_cast<std::uint64_t>(k) * kBatches +
                                     static_cast<std::uint64_t>(b));
            const auto marginal = chains::sample_marginal(model, cfg.x0, static_cast<int>(steps[k]),
                                                          per_batch, derive.next_u64(), cfg.exec);
            estimates.push_back(transport::wasserstein_to_uniform01(marginal, cfg.metric));
        }
        const MeanCi est = reduce(estimates);
        curve.rows.push_back({static_cast<double>(steps[k]), est.mean, est.ci95,
                              std::numeric_limits<double>::quiet_NaN()});
    }
    // noise floor: distance of an exact-uniform draw of the same size
    {
        std::vector<double> uniform_draw(static_cast<std::size_t>(per_batch));
        Rng rng(cfg.seed, 0xF100Fu);
        for (double& u : uniform_draw) u = rng.uniform01();
        curve.sampling_floor = transport::wasserstein_to_uniform01(
            transport::EmpiricalMeasure::from_scalars(uniform_draw), cfg.metric);
    }
    return curve;
}

// ---- SDDE experiments -------------------------------------------------------

ConvergenceCurve sdde_two_start(const ExperimentConfig& cfg) {
    const SddeSetup setup = build_sdde_setup(cfg.model, cfg.x0, cfg.y0);
    if (cfg.n_samples < 2)
        throw std::invalid_argument("sdde two-start experiments need n_samples >= 2");

    std::vector<std::vector<double>> dist(static_cast<std::size_t>(cfg.n_samples),
                                          std::vector<double>(cfg.schedule.size()));
    for_index(cfg.n_samples, cfg.exec, [&](std::int64_t i) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(i));
        chains::sdde_observe_coupled(
            setup.spec, setup.x0, setup.y0, cfg.schedule, setup.dt, rng,
            [&](std::size_t k, const chains::SegmentView& sx, const chains::SegmentView& sy) {
                const transport::Point px(sx.data, sx.data + sx.n_points * sx.dim);
                const transport::Point py(sy.data, sy.data + sy.n_points * sy.dim);
                dist[static_cast<std::size_t>(i)][k] = cfg.metric(px, py);
            });
    });

    ConvergenceCurve curve;
    curve.reference = "two-start-coupling";
    for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
        std::vector<double> column(static_cast<std::size_t>(cfg.n_samples));
        for (std::size_t i = 0; i < column.size(); ++i) column[i] = dist[i][k];
        const MeanCi est = reduce(column);
        curve.rows.push_back(
            {cfg.schedule[k], est.mean, est.ci95, std::numeric_limits<double>::quiet_NaN()});
    }
    return curve;
}

ConvergenceCurve sdde_vs_surrogate(const ExperimentConfig& cfg) {
    const SddeSetup setup = build_sdde_setup(cfg.model, cfg.x0, cfg.x0);
    if (cfg.n_samples < 2) throw std::invalid_argument("sdde experiments need n_samples >= 2");
    constexpr std::size_t kOtCap = 512;

    chains::ContinuousModel model{"sdde", setup.spec, setup.grid, setup.dt, nullptr};
    const double far_horizon = 10.0 * cfg.schedule.back();
    const int surrogate_n = 4 * cfg.n_samples;

    auto subsample = [](const transport::EmpiricalMeasure& m, std::size_t cap) {
        if (m.size() <= cap) return m;
        std::vector<transport::Point> pts;
        pts.reserve(cap);
        const std::size_t stride = m.size() / cap;
        for (std::size_t i = 0; i < cap; ++i) pts.push_back(m.point(i * stride));
        return transport::EmpiricalMeasure::uniform(std::move(pts));
    };

    Rng derive(cfg.seed, 0x5u);
    const auto surrogate_full = chains::sample_marginal(model, setup.x0, far_horizon, surrogate_n,
                                                        derive.next_u64(),
                                                        chains::SddeObservable::Segment, cfg.exec);
    const auto surrogate = subsample(surrogate_full, kOtCap);

    ConvergenceCurve curve;
    curve.reference = "surrogate";
    curve.surrogate_warning = true;
    // floor: distance between two independent draws of the surrogate itself
    const auto half_a = subsample(chains::sample_marginal(model, setup.x0, far_horizon,
                                                          cfg.n_samples, derive.next_u64(),
                                                          chains::SddeObservable::Segment, cfg.exec),
                                  kOtCap);
    const auto half_b = subsample(chains::sample_marginal(model, setup.x0, far_horizon,
                                                          cfg.n_samples, derive.next_u64(),
                                                          chains::SddeObservable::Segment, cfg.exec),
                                  kOtCap);
    curve.sampling_floor = transport::wasserstein_exact(half_a, half_b, cfg.metric).first;

    for (double t : cfg.schedule) {
        const auto marginal =
            subsample(chains::sample_marginal(model, setup.x0, t, cfg.n_samples,
                                              derive.next_u64(), chains::SddeObservable::Segment,
                                              cfg.exec),
                      kOtCap);
        const double d = transport::wasserstein_exact(marginal, surrogate, cfg.metric).first;
        curve.rows.push_back({t, d, curve.sampling_floor,
                              std::numeric_limits<double>::quiet_NaN()});
    }
    return curve;
}

void attach_bound(ConvergenceCurve& curve, const ExperimentConfig& cfg) {
    if (!cfg.phi.has_value()) return;
    double c1, c2;
    if (cfg.fit_constants) {
        const FitResult fit = fit_rate_constants(curve, *cfg.phi, cfg.epsilon);
        c1 = fit.c1;
        c2 = fit.c2;
    } else if (cfg.given_c1 && cfg.given_c2) {
        c1 = *cfg.given_c1;
        c2 = *cfg.given_c2;
    } else {
        return;
    }
    const rates::RateBoundParams params(c1, c2, cfg.epsilon, 0.0);
    for (auto& row : curve.rows) row.bound = rates::rate_bound(*cfg.phi, params, row.t);
}

}  // namespace

void ConvergenceCurve::write_csv(std::ostream& out) const {
    out << "# schema: 1\n";
    out << "# reference: " << reference << "\n";
    out << "# sampling_floor: " << format_double(sampling_floor) << "\n";
    if (surrogate_warning)
        out << "# warning: reference is a long-run surrogate; distances floor at the sampling "
               "error\n";
    out << "t,distance,ci95,bound\n";
    for (const auto& row : rows)
        out << format_double(row.t) << ',' << format_double(row.distance) << ','
            << format_double(row.ci95) << ',' << format_double(row.bound) << '\n';
}

void ConvergenceCurve::write_csv_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("ConvergenceCurve: cannot open '" + path + "'");
    write_csv(out);
}

ConvergenceCurve ConvergenceCurve::read_csv(std::istream& in) {
    ConvergenceCurve curve;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("sampling_floor:");
            if (pos != std::string::npos) curve.sampling_floor = std::stod(line.substr(pos + 15));
            const auto ref = line.find("reference:");
            if (ref != std::string::npos) {
                curve.reference = line.substr(ref + 10);
                const auto first = curve.reference.find_first_not_of(' ');
                if (first != std::string::npos) curve.reference = curve.reference.substr(first);
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // column header row
            continue;
        }
        std::stringstream row(line);
        std::string cell;
        CurveRow r{};
        std::getline(row, cell, ',');
        r.t = std::stod(cell);
        std::getline(row, cell, ',');
        r.distance = std::stod(cell);
        std::getline(row, cell, ',');
        r.ci95 = std::stod(cell);
        std::getline(row, cell, ',');
        r.bound = std::stod(cell);
        curve.rows.push_back(r);
    }
    return curve;
}

ConvergenceCurve ConvergenceCurve::read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ConvergenceCurve: cannot open '" + path + "'");
    return read_csv(in);
}

nlohmann::json ConvergenceCurve::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json r{{"t", row.t}, {"distance", row.distance}, {"ci95", row.ci95}};
        if (std::isfinite(row.bound)) r["bound"] = row.bound;
        rows_json.push_back(std::move(r));
    }
    return {{"schema", 1},
            {"reference", reference},
            {"sampling_floor", sampling_floor},
            {"surrogate_warning", surrogate_warning},
            {"rows", std::move(rows_json)}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& spec) {
    ExperimentConfig cfg;
    const std::string mode = spec.at("experiment").get<std::string>();
    if (mode == "two_start")
        cfg.mode = Mode::TwoStart;
    else if (mode == "vs_reference")
        cfg.mode = Mode::VsReference;
    else
        throw std::invalid_argument("ExperimentConfig: unknown experiment '" + mode + "'");

    cfg.model = spec.at("model");
    cfg.metric = transport::Metric::from_json(spec.at("metric"));
    cfg.schedule = spec.at("schedule").get<std::vector<double>>();
    if (cfg.schedule.empty()) throw std::invalid_argument("ExperimentConfig: empty schedule");
    for (std::size_t i = 1; i < cfg.schedule.size(); ++i)
        if (!(cfg.schedule[i] > cfg.schedule[i - 1]))
            throw std::invalid_argument("ExperimentConfig: schedule must be strictly increasing");
    if (!spec.contains("seed"))
        throw std::invalid_argument("ExperimentConfig: seed is mandatory (no wall-clock default)");
    cfg.seed = spec.at("seed").get<std::uint64_t>();
    cfg.n_samples = spec.value("n_samples", 0);
    cfg.x0 = spec.value("x0", 0.0);
    cfg.y0 = spec.value("y0", 0.0);

    if (spec.contains("rate")) {
        const auto& rate = spec.at("rate");
        cfg.phi = rates::RateFunction::from_json(rate.at("phi"));
        cfg.epsilon = rate.value("epsilon", 0.1);
        cfg.fit_constants = rate.value("fit", false);
        if (rate.contains("c1")) cfg.given_c1 = rate.at("c1").get<double>();
        if (rate.contains("c2")) cfg.given_c2 = rate.at("c2").get<double>();
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ExperimentConfig: cannot open '" + path + "'");
    nlohmann::json spec;
    in >> spec;
    return from_json(spec);
}

SddeSetup build_sdde_setup(const nlohmann::json& model, double x0_const, double y0_const) {
    const double delay = model.value("delay", 1.0);
    const int grid_m = model.value("grid_points", 100);
    const double dt = model.value("dt", 0.01);
    chains::SegmentGrid grid(delay, grid_m);

    chains::VkDriftParams drift{};
    drift.kappa = model.value("kappa", 1.0);
    drift.alpha = model.value("alpha", 1.0);
    drift.big_m = model.value("big_m", 1.0);
    drift.dim = 1;

    const auto& noise = model.at("noise");
    chains::BoundedNoiseParams g{};
    g.lo = noise.value("lo", 0.2);
    g.hi = noise.value("hi", 1.0);
    g.slope = noise.value("slope", 1.0);

    chains::SddeSpec spec = chains::delayed_noise_sdde(drift, g);
    return SddeSetup{std::move(spec), grid, dt,
                     chains::SegmentState::constant_scalar(grid, x0_const),
                     chains::SegmentState::constant_scalar(grid, y0_const)};
}

ConvergenceCurve run_convergence_experiment(const ExperimentConfig& cfg) {
    const std::string kind = cfg.model.at("kind").get<std::string>();
    ConvergenceCurve curve;
    if (kind == "digit") {
        curve = (cfg.mode == ExperimentConfig::Mode::TwoStart) ? digit_two_start(cfg)
                                                               : digit_vs_uniform(cfg);
    } else if (kind == "sdde") {
        curve = (cfg.mode == ExperimentConfig::Mode::TwoStart) ? sdde_two_start(cfg)
                                                               : sdde_vs_surrogate(cfg);
    } else {
        throw std::invalid_argument("run_convergence_experiment: unknown model kind '" + kind +
                                    "'");
    }
    attach_bound(curve, cfg);
    return curve;
}

FitResult fit_rate_constants(const ConvergenceCurve& curve, const rates::RateFunction& phi,
                             double epsilon) {
    std::vector<double> ts, logs;
    for (const auto& row : curve.rows) {
        if (!(row.distance > 0.0)) continue;
        if (curve.sampling_floor > 0.0 && row.distance <= 1.5 * curve.sampling_floor) continue;
        ts.push_back(row.t);
        logs.push_back(std::log(row.distance));
    }
    if (ts.size() < 4)
        throw std::invalid_argument("fit_rate_constants: need >= 4 points above the floor");
    const auto [min_it, max_it] = std::minmax_element(logs.begin(), logs.end());
    if (*max_it - *min_it < 1e-9)
        throw DegenerateFitError("fit_rate_constants: curve is flat");

    const double exponent = 1.0 - epsilon;
    auto model_terms = [&](double log_c2) {
        std::vector<double> term(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double hinv = rates::h_inverse(phi, std::exp(log_c2) * ts[i]);
            term[i] = -exponent * std::log(phi(hinv));
        }
        return term;
    };
    auto objective = [&](double log_c2) {
        const auto term = model_terms(log_c2);
        double intercept = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) intercept += logs[i] - term[i];
        intercept /= static_cast<double>(ts.size());
        double rss = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double r = logs[i] - intercept - term[i];
            rss += r * r;
        }
        return std::sqrt(rss / static_cast<double>(ts.size()));
    };

    // coarse scan then golden-section refine over log C2
    const double lo0 = std::log(1e-4), hi0 = std::log(1e4);
    double best = lo0, best_val = objective(lo0);
    constexpr int kScan = 64;
    for (int i = 1; i <= kScan; ++i) {
        const double x = lo0 + (hi0 - lo0) * i / kScan;
        const double v = objective(x);
        if (v < best_val) {
            best_val = v;
            best = x;
        }
    }
    double lo = best - (hi0 - lo0) / kScan;
    double hi = best + (hi0 - lo0) / kScan;
    const double gr = 0.6180339887498949;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    for (int iter = 0; iter < 80; ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = objective(x2);
        }
    }
    const double log_c2 = 0.5 * (lo + hi);

    const auto term = model_terms(log_c2);
    double intercept = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) intercept += logs[i] - term[i];
    intercept /= static_cast<double>(ts.size());

    FitResult fit;
    fit.c2 = std::exp(log_c2);
    fit.c1 = std::exp(intercept);
    fit.residual = objective(log_c2);

    // one-sided adjustment: lift C1 so the bound dominates the fitted points
    double lift = 1.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double bound = intercept + term[i];
        lift = std::max(lift, std::exp(logs[i] - bound));
    }
    fit.c1 *= lift;
    return fit;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("linear_fit: need matching inputs with >= 3 points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw DegenerateFitError("linear_fit: degenerate abscissae");
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    const double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss_res += r * r;
    }
    fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 0.0;
    return fit;
}

}  // namespace subgeom::harness
