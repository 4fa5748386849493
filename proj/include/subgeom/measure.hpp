#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace subgeom::transport {

/// A state is a point in R^n; scalar states are dimension-1 points and
/// discretized path segments are flattened onto their grid.
using Point = std::vector<double>;

/**
 * Weighted finite sample set standing in for a probability measure.
 * Weights are nonnegative and sum to 1 within 1e-12.
 */
class EmpiricalMeasure {
  public:
    EmpiricalMeasure(std::vector<Point> points, std::vector<double> weights);

    /// Equal-weight measure on the given points.
    static EmpiricalMeasure uniform(std::vector<Point> points);
    static EmpiricalMeasure from_scalars(const std::vector<double>& values);
    static EmpiricalMeasure from_scalars(const std::vector<double>& values,
                                         std::vector<double> weights);
    static EmpiricalMeasure dirac(Point point);

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return points_.front().size(); }
    const Point& point(std::size_t i) const { return points_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<Point>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Scalar value of point i; requires dim() == 1.
    double scalar(std::size_t i) const;

    /// Merge coincident points (exact equality), summing weights.
    EmpiricalMeasure deduplicated() const;

    double mean_scalar() const;

    // --- serialization: rows of "value[,value...],weight" ---
    static EmpiricalMeasure read_csv(std::istream& in);
    static EmpiricalMeasure read_csv_file(const std::string& path);
    void write_csv(std::ostream& out) const;
    void write_csv_file(const std::string& path) const;

    static EmpiricalMeasure from_json(const nlohmann::json& spec);
    nlohmann::json to_json() const;

  private:
    std::vector<Point> points_;
    std::vector<double> weights_;
};

}  // namespace subgeom::transport
