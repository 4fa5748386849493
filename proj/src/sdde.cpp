#include "subgeom/sdde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subgeom/errors.hpp"

namespace subgeom::chains {

namespace {

constexpr double kBlowUpGuard = 1e12;

std::vector<double> radial_drift_value(const SegmentView& seg, const VkDriftParams& p) {
    std::vector<double> f(static_cast<std::size_t>(seg.dim), 0.0);
    const double norm = seg.current_norm();
    // -kappa v |v|^{alpha-2}, linearized inside the ball to stay continuous
    const double coeff =
        (norm >= p.big_m) ? -p.kappa * std::pow(norm, p.alpha - 2.0)
                          : -p.kappa * std::pow(p.big_m, p.alpha - 2.0);
    for (int c = 0; c < seg.dim; ++c) f[static_cast<std::size_t>(c)] = coeff * seg.back(c);
    if (p.f1) {
        const auto extra = p.f1(seg);
        for (int c = 0; c < seg.dim; ++c) f[static_cast<std::size_t>(c)] += extra[static_cast<std::size_t>(c)];
    }
    return f;
}

void validate_vk_params(const VkDriftParams& p) {
    if (!(p.kappa > 0.0)) throw std::invalid_argument("vk_drift: kappa must be positive");
    if (!(p.alpha > 0.0 && p.alpha <= 1.0))
        throw std::invalid_argument("vk_drift: alpha must lie in (0,1]");
    if (!(p.big_m > 0.0)) throw std::invalid_argument("vk_drift: M must be positive");
    if (p.dim < 1) throw std::invalid_argument("vk_drift: dim must be >= 1");
}

// Buffer holding a path at integration resolution; the trailing window of
// window_points values is the current segment.
struct FinePath {
    std::vector<double> values;  // n_appended * dim
    int dim;
    int window_points;
    double dt;

    SegmentView view() const {
        const std::size_t total = values.size() / static_cast<std::size_t>(dim);
        return SegmentView{values.data() + (total - static_cast<std::size_t>(window_points)) *
                                               static_cast<std::size_t>(dim),
                           window_points, dim, dt};
    }
};

FinePath refine_initial(const SegmentState& x0, double dt) {
    const SegmentGrid& grid = x0.grid();
    const double ratio = grid.dt() / dt;
    const int k = static_cast<int>(std::llround(ratio));
    if (k < 1 || std::abs(k * dt - grid.dt()) > 1e-9 * grid.dt())
        throw std::invalid_argument("sdde_integrate: dt must divide the grid step of x0");
    FinePath path;
    path.dim = x0.dim();
    path.window_points = grid.m * k + 1;
    path.dt = dt;
    path.values.reserve(static_cast<std::size_t>(path.window_points) * x0.dim() * 2);
    const auto& coarse = x0.values();
    for (int j = 0; j < path.window_points; ++j) {
        const int cell = std::min(j / k, grid.m - 1);
        const double w = (static_cast<double>(j) / k) - cell;
        for (int c = 0; c < path.dim; ++c) {
            const double lo = coarse[static_cast<std::size_t>(cell) * path.dim + c];
            const double hi = coarse[static_cast<std::size_t>(cell + 1) * path.dim + c];
            path.values.push_back((1.0 - w) * lo + w * hi);
        }
    }
    return path;
}

long steps_for(double horizon, double dt) {
    if (!(horizon >= 0.0)) throw std::invalid_argument("sdde_integrate: horizon must be >= 0");
    const long steps = std::lround(horizon / dt);
    if (std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("sdde_integrate: horizon must be a multiple of dt");
    return steps;
}

void euler_step(const SddeSpec& spec, FinePath& path, const double* noise, double sqrt_dt) {
    const SegmentView seg = path.view();
    const auto f = spec.drift(seg);
    const auto g = spec.diffusion(seg);
    double next[16];
    if (spec.dim > 16) throw std::invalid_argument("sdde_integrate: dimension above 16");
    for (int c = 0; c < spec.dim; ++c) {
        double increment = f[static_cast<std::size_t>(c)] * path.dt;
        for (int w = 0; w < spec.wiener_dim; ++w)
            increment += g[static_cast<std::size_t>(c * spec.wiener_dim + w)] * sqrt_dt * noise[w];
        next[c] = seg.back(c) + increment;
        if (!(std::abs(next[c]) < kBlowUpGuard))
            throw BlowUpError("sdde_integrate: trajectory exceeded the 1e12 guard");
    }
    path.values.insert(path.values.end(), next, next + spec.dim);
}

SegmentState downsample_terminal(const FinePath& path, const SegmentState& x0) {
    const SegmentGrid& grid = x0.grid();
    const int k = (path.window_points - 1) / grid.m;
    const SegmentView seg = path.view();
    std::vector<double> coarse;
    coarse.reserve(static_cast<std::size_t>(grid.points()) * path.dim);
    for (int i = 0; i <= grid.m; ++i)
        for (int c = 0; c < path.dim; ++c)
            coarse.push_back(seg.data[static_cast<std::size_t>(i * k) * path.dim + c]);
    return SegmentState(grid, path.dim, std::move(coarse));
}

std::vector<long> schedule_steps(std::span<const double> schedule, double dt) {
    std::vector<long> steps;
    steps.reserve(schedule.size());
    double prev = -1.0;
    for (double t : schedule) {
        if (!(t >= 0.0) || t <= prev)
            throw std::invalid_argument("sdde schedule must be nonnegative and strictly increasing");
        steps.push_back(steps_for(t, dt));
        prev = t;
    }
    return steps;
}

}  // namespace

SddeSpec vk_drift(const VkDriftParams& params,
                  std::function<std::vector<double>(const SegmentView&)> diffusion,
                  int wiener_dim) {
    validate_vk_params(params);
    if (!diffusion) throw std::invalid_argument("vk_drift: diffusion must be provided");
    SddeSpec spec;
    spec.dim = params.dim;
    spec.wiener_dim = wiener_dim;
    spec.drift = [params](const SegmentView& seg) { return radial_drift_value(seg, params); };
    spec.diffusion = std::move(diffusion);

    // construction-time spot check of the radial condition
    const SegmentGrid probe_grid(1.0, 4);
    const double violation = vk_condition_violation(spec, probe_grid, params.kappa, params.alpha,
                                                    params.big_m, 256, 0x5eedu);
    if (violation > 1e-12)
        throw std::invalid_argument("vk_drift: radial drift condition violated by the composed f");
    return spec;
}

SddeSpec delayed_noise_sdde(const VkDriftParams& drift_params, const BoundedNoiseParams& noise) {
    if (drift_params.dim != 1) throw std::invalid_argument("delayed_noise_sdde: scalar equation only");
    if (!(noise.lo > 0.0 && noise.hi > noise.lo))
        throw std::invalid_argument("delayed_noise_sdde: need 0 < lo < hi");
    auto amplitude = [noise](const SegmentView& seg) {
        const double delayed = seg.front(0);  // value at lag -r
        const double g = noise.lo + (noise.hi - noise.lo) / (1.0 + std::exp(-noise.slope * delayed));
        return std::vector<double>{g};
    };
    return vk_drift(drift_params, amplitude, 1);
}

double vk_condition_violation(const SddeSpec& spec, const SegmentGrid& grid, double kappa,
                              double alpha, double big_m, int n_samples, std::uint64_t seed) {
    double worst = -std::numeric_limits<double>::infinity();
    const int dim = spec.dim;
    for (int s = 0; s < n_samples; ++s) {
        Rng rng(seed, static_cast<std::uint64_t>(s));
        std::vector<double> values(static_cast<std::size_t>(grid.points()) * dim);
        for (double& v : values) v = rng.uniform(-big_m - 10.0, big_m + 10.0);
        // force the current value outside the ball
        double norm = 0.0;
        for (int c = 0; c < dim; ++c) {
            double& cur = values[static_cast<std::size_t>(grid.m) * dim + c];
            norm += cur * cur;
        }
        norm = std::sqrt(norm);
        const double target = big_m + rng.uniform01() * 10.0;
        const double scale = (norm > 0.0) ? target / norm : 0.0;
        for (int c = 0; c < dim; ++c) {
            double& cur = values[static_cast<std::size_t>(grid.m) * dim + c];
            cur = (norm > 0.0) ? cur * scale : (c == 0 ? target : 0.0);
        }
        const SegmentState seg(grid, dim, std::move(values));
        const SegmentView view{seg.values().data(), grid.points(), dim, grid.dt()};
        const auto f = spec.drift(view);
        double inner = 0.0;
        for (int c = 0; c < dim; ++c) inner += f[static_cast<std::size_t>(c)] * view.back(c);
        worst = std::max(worst, inner + kappa * std::pow(view.current_norm(), alpha));
    }
    return worst;
}

SegmentState sdde_integrate(const SddeSpec& spec, const SegmentState& x0, double horizon,
                            double dt, Rng& rng) {
    if (x0.dim() != spec.dim) throw std::invalid_argument("sdde_integrate: dimension mismatch");
    const long steps = steps_for(horizon, dt);
    FinePath path = refine_initial(x0, dt);
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> noise(static_cast<std::size_t>(spec.wiener_dim));
    for (long s = 0; s < steps; ++s) {
        for (double& z : noise) z = rng.normal();
        euler_step(spec, path, noise.data(), sqrt_dt);
    }
    return downsample_terminal(path, x0);
}

void sdde_observe(const SddeSpec& spec, const SegmentState& x0, std::span<const double> schedule,
                  double dt, Rng& rng,
                  const std::function<void(std::size_t, const SegmentView&)>& observe) {
    if (x0.dim() != spec.dim) throw std::invalid_argument("sdde_observe: dimension mismatch");
    const auto at_steps = schedule_steps(schedule, dt);
    FinePath path = refine_initial(x0, dt);
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> noise(static_cast<std::size_t>(spec.wiener_dim));
    std::size_t next_obs = 0;
    long step = 0;
    while (next_obs < at_steps.size() && at_steps[next_obs] == step) {
        observe(next_obs, path.view());
        ++next_obs;
    }
    const long last = at_steps.empty() ? 0 : at_steps.back();
    while (step < last) {
        for (double& z : noise) z = rng.normal();
        euler_step(spec, path, noise.data(), sqrt_dt);
        ++step;
        while (next_obs < at_steps.size() && at_steps[next_obs] == step) {
            observe(next_obs, path.view());
            ++next_obs;
        }
    }
}

void sdde_observe_coupled(
    const SddeSpec& spec, const SegmentState& x0, const SegmentState& y0,
    std::span<const double> schedule, double dt, Rng& rng,
    const std::function<void(std::size_t, const SegmentView&, const SegmentView&)>& observe) {
    if (x0.dim() != spec.dim || y0.dim() != spec.dim)
        throw std::invalid_argument("sdde_observe_coupled: dimension mismatch");
    if (!(x0.grid() == y0.grid()))
        throw std::invalid_argument("sdde_observe_coupled: the two starts need one grid");
    const auto at_steps = schedule_steps(schedule, dt);
    FinePath px = refine_initial(x0, dt);
    FinePath py = refine_initial(y0, dt);
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> noise(static_cast<std::size_t>(spec.wiener_dim));
    std::size_t next_obs = 0;
    long step = 0;
    while (next_obs < at_steps.size() && at_steps[next_obs] == step) {
        observe(next_obs, px.view(), py.view());
        ++next_obs;
    }
    const long last = at_steps.empty() ? 0 : at_steps.back();
    while (step < last) {
        for (double& z : noise) z = rng.normal();
        euler_step(spec, px, noise.data(), sqrt_dt);
        euler_step(spec, py, noise.data(), sqrt_dt);
        ++step;
        while (next_obs < at_steps.size() && at_steps[next_obs] == step) {
            observe(next_obs, px.view(), py.view());
            ++next_obs;
        }
    }
}

}  // namespace subgeom::chains
