#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "subgeom/measure.hpp"

namespace subgeom::transport {

/**
 * Distance on the state space.  The bounded kinds satisfy d <= 1 as the
 * contraction theory requires:
 *
 *   Discrete            d0(x,y) = 1(x != y)
 *   BoundedEuclidean    d_beta(x,y) = min(1, |x-y|_2 / beta)
 *   BoundedSupSegment   d_beta(x,y) = min(1, max_i |x_i-y_i| / beta)
 *
 * Euclidean is the raw |x-y|_2 cost; it is not bounded by 1 but is the
 * natural cost for W1 computations on the line.
 */
class Metric {
  public:
    enum class Kind { Discrete, BoundedEuclidean, BoundedSupSegment, Euclidean };

    static Metric discrete();
    static Metric bounded_euclidean(double beta, std::size_t expect_dim = 0);
    static Metric bounded_sup_segment(double beta, std::size_t expect_dim = 0);
    static Metric euclidean();

    /// Tokens: "discrete", "euclid" / "euclid1d", "deuclid:<beta>", "dsup:<beta>".
    static Metric parse(std::string_view token);
    static Metric from_json(const nlohmann::json& spec);

    double operator()(const Point& x, const Point& y) const;

    Kind kind() const { return kind_; }
    double beta() const { return beta_; }
    /// True when d <= 1 holds by construction.
    bool bounded() const { return kind_ != Kind::Euclidean; }

    std::string describe() const;

  private:
    Kind kind_ = Kind::Euclidean;
    double beta_ = 1.0;
    std::size_t expect_dim_ = 0;
};

}  // namespace subgeom::transport
