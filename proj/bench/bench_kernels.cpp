// Timing comparison of the OpenMP kernels against their serial reference
// paths.  The two must also agree bit for bit; this is checked here as well
// since a benchmark that drifts from the reference measures nothing.

#include <chrono>
#include <cstdio>
#include <functional>

#include "subgeom/convergence.hpp"
#include "subgeom/digit_chain.hpp"
#include "subgeom/drift.hpp"
#include "subgeom/models.hpp"
#include "subgeom/parallel.hpp"
#include "subgeom/transport.hpp"

using namespace subgeom;

namespace {

double seconds_of(const std::function<void()>& work) {
    const auto start = std::chrono::steady_clock::now();
    work();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-34s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  identical: %s\n", name,
                serial, parallel, serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main() {
    std::printf("threads available: %d\n\n", max_threads());

    {
        const auto model = chains::make_digit_chain();
        transport::EmpiricalMeasure par = chains::sample_marginal(model, 0.3, 1, 1, 1);
        transport::EmpiricalMeasure ser = par;
        const double t_par = seconds_of([&] {
            par = chains::sample_marginal(model, 0.3, 16, 2000000, 11, Exec::Parallel);
        });
        const double t_ser = seconds_of([&] {
            ser = chains::sample_marginal(model, 0.3, 16, 2000000, 11, Exec::Serial);
        });
        report("digit marginal (2e6 x 16 steps)", t_ser, t_par, par.points() == ser.points());
    }

    {
        chains::VkDriftParams params{1.0, 1.0, 1.0, 1, nullptr};
        chains::BoundedNoiseParams noise{0.2, 1.0, 1.0};
        auto spec = chains::delayed_noise_sdde(params, noise);
        const chains::SegmentGrid grid(1.0, 100);
        chains::ContinuousModel model{"sdde", spec, grid, 0.01, nullptr};
        const auto x0 = chains::SegmentState::constant_scalar(grid, 1.0);
        transport::EmpiricalMeasure par = chains::sample_marginal(model, x0, 0.01, 1, 1);
        transport::EmpiricalMeasure ser = par;
        const double t_par = seconds_of([&] {
            par = chains::sample_marginal(model, x0, 4.0, 2000, 13,
                                          chains::SddeObservable::CurrentValue, Exec::Parallel);
        });
        const double t_ser = seconds_of([&] {
            ser = chains::sample_marginal(model, x0, 4.0, 2000, 13,
                                          chains::SddeObservable::CurrentValue, Exec::Serial);
        });
        report("sdde marginal (2000 x 400 steps)", t_ser, t_par, par.points() == ser.points());
    }

    {
        auto sampler = [](Rng& rng) {
            double x = 0.2, y = 0.9;
            for (int i = 0; i < 24; ++i) {
                const int digit = static_cast<int>(rng.below(10));
                x = chains::digit_step_with(x, digit);
                y = chains::digit_step_with(y, digit);
            }
            return std::make_pair(transport::Point{x}, transport::Point{y});
        };
        transport::MonteCarloEstimate par, ser;
        const double t_par = seconds_of([&] {
            par = transport::coupling_upper_bound(sampler, transport::Metric::euclidean(),
                                                  1000000, 17, Exec::Parallel);
        });
        const double t_ser = seconds_of([&] {
            ser = transport::coupling_upper_bound(sampler, transport::Metric::euclidean(),
                                                  1000000, 17, Exec::Serial);
        });
        report("coupling bound (1e6 pairs)", t_ser, t_par,
               par.mean == ser.mean && par.ci95 == ser.ci95);
    }

    {
        auto model = chains::make_digit_chain();
        model.lyapunov = [](double x) { return x; };
        const auto phi = rates::RateFunction::linear(0.9);
        const std::vector<double> states{0.1, 0.3, 0.5, 0.7, 0.9};
        lyapunov::DriftReport par, ser;
        const double t_par = seconds_of([&] {
            par = lyapunov::check_drift_discrete(model, phi, 0.45, states, 400000, 19,
                                                 Exec::Parallel);
        });
        const double t_ser = seconds_of([&] {
            ser = lyapunov::check_drift_discrete(model, phi, 0.45, states, 400000, 19,
                                                 Exec::Serial);
        });
        bool same = true;
        for (std::size_t i = 0; i < par.rows.size(); ++i)
            same = same && par.rows[i].margin == ser.rows[i].margin &&
                   par.rows[i].ci95 == ser.rows[i].ci95;
        report("drift check (5 states x 4e5)", t_ser, t_par, same);
    }

    return 0;
}
