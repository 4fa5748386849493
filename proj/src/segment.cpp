#include "subgeom/segment.hpp"

#include <cmath>
#include <stdexcept>

namespace subgeom::chains {

SegmentGrid::SegmentGrid(double r_in, int m_in) : r(r_in), m(m_in) {
    if (!(r > 0.0)) throw std::invalid_argument("SegmentGrid: delay horizon must be positive");
    if (m < 1) throw std::invalid_argument("SegmentGrid: need at least one grid cell");
}

SegmentState::SegmentState(SegmentGrid grid, int dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
    if (dim_ < 1) throw std::invalid_argument("SegmentState: dimension must be >= 1");
    if (values_.size() != static_cast<std::size_t>(grid_.points()) * dim_)
        throw std::invalid_argument("SegmentState: value count does not match the grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("SegmentState: non-finite entry");
}

SegmentState SegmentState::constant(SegmentGrid grid, const std::vector<double>& v0) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(grid.points()) * v0.size());
    for (int i = 0; i < grid.points(); ++i) values.insert(values.end(), v0.begin(), v0.end());
    return SegmentState(grid, static_cast<int>(v0.size()), std::move(values));
}

SegmentState SegmentState::constant_scalar(SegmentGrid grid, double v0) {
    return constant(grid, std::vector<double>{v0});
}

std::vector<double> SegmentState::at(int i) const {
    if (i < 0 || i > grid_.m) throw std::out_of_range("SegmentState::at: index outside the grid");
    return std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(i) * dim_,
                               values_.begin() + static_cast<std::ptrdiff_t>(i + 1) * dim_);
}

double SegmentState::scalar_at(int i) const {
    if (dim_ != 1) throw std::invalid_argument("SegmentState::scalar_at: dimension is not 1");
    return at(i)[0];
}

double SegmentState::sup_distance(const SegmentState& other) const {
    if (!(grid_ == other.grid_) || dim_ != other.dim_)
        throw std::invalid_argument("SegmentState::sup_distance: mismatched grids");
    double sup = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i)
        sup = std::max(sup, std::abs(values_[i] - other.values_[i]));
    return sup;
}

double SegmentView::at_lag(double s, int coordinate) const {
    const double r = dt * (n_points - 1);
    if (s < -r - 1e-12 || s > 1e-12)
        throw std::domain_error("SegmentView::at_lag: lag outside [-r, 0]");
    double pos = (s + r) / dt;
    if (pos < 0.0) pos = 0.0;
    const int lo = std::min(n_points - 1, static_cast<int>(pos));
    const int hi = std::min(n_points - 1, lo + 1);
    const double w = pos - lo;
    return (1.0 - w) * data[lo * dim + coordinate] + w * data[hi * dim + coordinate];
}

double SegmentView::sup_norm() const {
    double sup = 0.0;
    for (int i = 0; i < n_points * dim; ++i) sup = std::max(sup, std::abs(data[i]));
    return sup;
}

double SegmentView::current_norm() const {
    double sq = 0.0;
    for (int c = 0; c < dim; ++c) {
        const double v = back(c);
        sq += v * v;
    }
    return std::sqrt(sq);
}

}  // namespace subgeom::chains
