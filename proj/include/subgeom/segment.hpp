#pragma once

#include <cstddef>
#include <vector>

namespace subgeom::chains {

/// Uniform discretization of the delay window [-r, 0].
struct SegmentGrid {
    double r;  // delay horizon, > 0
    int m;     // grid cells, >= 1

    SegmentGrid(double r_in, int m_in);
    double dt() const { return r / m; }
    int points() const { return m + 1; }

    bool operator==(const SegmentGrid& other) const = default;
};

/**
 * Discretized path segment on [-r, 0]: the Markov state of a delay equation.
 * values stores m+1 points of R^dim; index 0 is the value at -r, index m the
 * current value at 0.
 */
class SegmentState {
  public:
    SegmentState(SegmentGrid grid, int dim, std::vector<double> values);

    /// Constant-in-time segment equal to v0 everywhere.
    static SegmentState constant(SegmentGrid grid, const std::vector<double>& v0);
    static SegmentState constant_scalar(SegmentGrid grid, double v0);

    const SegmentGrid& grid() const { return grid_; }
    int dim() const { return dim_; }
    const std::vector<double>& values() const { return values_; }

    std::vector<double> at(int i) const;
    std::vector<double> current() const { return at(grid_.m); }
    double scalar_at(int i) const;
    double current_scalar() const { return scalar_at(grid_.m); }

    /// Sup-norm distance between two segments on the same grid.
    double sup_distance(const SegmentState& other) const;

    /// Flattened copy for transport computations.
    std::vector<double> flat() const { return values_; }

  private:
    SegmentGrid grid_;
    int dim_;
    std::vector<double> values_;  // (m+1) * dim
};

/**
 * Borrowed view of the trailing window of a path at integration resolution;
 * this is what drift and diffusion functionals consume, so they can read the
 * current value, any delayed value, and norms without copying.
 */
struct SegmentView {
    const double* data;  // n_points * dim values, oldest first
    int n_points;
    int dim;
    double dt;

    double back(int coordinate = 0) const { return data[(n_points - 1) * dim + coordinate]; }
    double front(int coordinate = 0) const { return data[coordinate]; }

    /// Value at lag s in [-r, 0] by linear interpolation.
    double at_lag(double s, int coordinate = 0) const;

    double sup_norm() const;
    /// Euclidean norm of the current value.
    double current_norm() const;
};

}  // namespace subgeom::chains
