#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "subgeom/metrics.hpp"
#include "subgeom/models.hpp"
#include "subgeom/parallel.hpp"
#include "subgeom/rates.hpp"

namespace subgeom::harness {

struct CurveRow {
    double t;
    double distance;
    double ci95;
    double bound;  // NaN when no theory bound is attached
};

/// Distance-versus-time curve with an optional theory-bound column.
struct ConvergenceCurve {
    std::vector<CurveRow> rows;
    std::string reference;        // "analytic-uniform01" | "two-start-coupling" | "surrogate"
    double sampling_floor = 0.0;  // estimated distance noise floor (0 for exact paths)
    bool surrogate_warning = false;

    void write_csv(std::ostream& out) const;
    void write_csv_file(const std::string& path) const;
    static ConvergenceCurve read_csv(std::istream& in);
    static ConvergenceCurve read_csv_file(const std::string& path);
    nlohmann::json to_json() const;
};

/**
 * Fully parsed experiment description.  All randomness flows from the
 * mandatory seed; there is no wall-clock default.
 */
struct ExperimentConfig {
    enum class Mode { TwoStart, VsReference };

    Mode mode;
    nlohmann::json model;  // {"kind":"digit"} or {"kind":"sdde", ...}
    transport::Metric metric;
    std::vector<double> schedule;  // strictly increasing
    int n_samples = 0;             // 0 selects the exact path where one exists
    std::uint64_t seed = 0;
    double x0 = 0.0;
    double y0 = 0.0;

    // optional rate-bound attachment
    std::optional<rates::RateFunction> phi;
    double epsilon = 0.1;
    bool fit_constants = false;
    std::optional<double> given_c1, given_c2;

    Exec exec = Exec::Parallel;

    static ExperimentConfig from_json(const nlohmann::json& spec);
    static ExperimentConfig from_file(const std::string& path);
};

/// SDDE model assembled from an experiment config fragment.
struct SddeSetup {
    chains::SddeSpec spec;
    chains::SegmentGrid grid;
    double dt;
    chains::SegmentState x0;
    chains::SegmentState y0;
};

SddeSetup build_sdde_setup(const nlohmann::json& model, double x0_const, double y0_const);

/**
 * Run the experiment: estimate the distance at every schedule point, attach
 * the theory bound (given or fitted), and return the curve.  Identical
 * config and seed give identical output bytes.
 */
ConvergenceCurve run_convergence_experiment(const ExperimentConfig& cfg);

struct FitResult {
    double c1;        // absorbs the (1 + V(x)) factor
    double c2;
    double residual;  // RMS log residual before the domination adjustment
};

/**
 * Least squares of log(distance) against log C1 - (1-eps) log phi(H^{-1}(C2 t))
 * over the rows above the sampling floor, followed by a one-sided lift of C1
 * so the fitted bound dominates every fitted point.
 * Throws DegenerateFitError on flat curves.
 */
FitResult fit_rate_constants(const ConvergenceCurve& curve, const rates::RateFunction& phi,
                             double epsilon);

struct LinearFit {
    double intercept;
    double slope;
    double r_squared;
};

/// Ordinary least squares y ~ intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace subgeom::harness
