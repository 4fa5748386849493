#include "subgeom/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace subgeom::transport {

Metric Metric::discrete() {
    Metric m;
    m.kind_ = Kind::Discrete;
    return m;
}

Metric Metric::bounded_euclidean(double beta, std::size_t expect_dim) {
    if (!(beta > 0.0)) throw std::invalid_argument("Metric: beta must be positive");
    Metric m;
    m.kind_ = Kind::BoundedEuclidean;
    m.beta_ = beta;
    m.expect_dim_ = expect_dim;
    return m;
}

Metric Metric::bounded_sup_segment(double beta, std::size_t expect_dim) {
    if (!(beta > 0.0)) throw std::invalid_argument("Metric: beta must be positive");
    Metric m;
    m.kind_ = Kind::BoundedSupSegment;
    m.beta_ = beta;
    m.expect_dim_ = expect_dim;
    return m;
}

Metric Metric::euclidean() { return Metric{}; }

Metric Metric::parse(std::string_view token) {
    if (token == "discrete") return discrete();
    if (token == "euclid" || token == "euclid1d") return euclidean();
    const auto colon = token.find(':');
    if (colon != std::string_view::npos) {
        const std::string kind(token.substr(0, colon));
        const double beta = std::stod(std::string(token.substr(colon + 1)));
        if (kind == "deuclid") return bounded_euclidean(beta);
        if (kind == "dsup") return bounded_sup_segment(beta);
    }
    throw std::invalid_argument("Metric::parse: unknown metric '" + std::string(token) + "'");
}

Metric Metric::from_json(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "discrete") return discrete();
    if (kind == "euclidean") return euclidean();
    if (kind == "bounded_euclidean") return bounded_euclidean(spec.at("beta").get<double>());
    if (kind == "sup_segment") return bounded_sup_segment(spec.at("beta").get<double>());
    throw std::invalid_argument("Metric::from_json: unknown kind '" + kind + "'");
}

double Metric::operator()(const Point& x, const Point& y) const {
    if (x.size() != y.size()) throw std::invalid_argument("Metric: dimension mismatch");
    if (expect_dim_ != 0 && x.size() != expect_dim_)
        throw std::invalid_argument("Metric: unexpected point dimension");
    switch (kind_) {
        case Kind::Discrete:
            return (x == y) ? 0.0 : 1.0;
        case Kind::BoundedEuclidean: {
            double sq = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - y[i];
                sq += d * d;
            }
            return std::min(1.0, std::sqrt(sq) / beta_);
        }
        case Kind::BoundedSupSegment: {
            double sup = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                sup = std::max(sup, std::abs(x[i] - y[i]));
            return std::min(1.0, sup / beta_);
        }
        case Kind::Euclidean: {
            double sq = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - y[i];
                sq += d * d;
            }
            return std::sqrt(sq);
        }
    }
    return 0.0;
}

std::string Metric::describe() const {
    switch (kind_) {
        case Kind::Discrete:
            return "discrete";
        case Kind::BoundedEuclidean:
            return "deuclid:" + std::to_string(beta_);
        case Kind::BoundedSupSegment:
            return "dsup:" + std::to_string(beta_);
        case Kind::Euclidean:
            return "euclid";
    }
    return "?";
}

}  // namespace subgeom::transport
