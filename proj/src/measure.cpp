#include "subgeom/measure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace subgeom::transport {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double kahan_sum(const std::vector<double>& values, std::size_t count) {
    double total = 0.0, carry = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double y = values[i] - carry;
        const double t = total + y;
        carry = (t - total) - y;
        total = t;
    }
    return total;
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<Point> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty()) throw std::invalid_argument("EmpiricalMeasure: no points");
    if (points_.size() != weights_.size())
        throw std::invalid_argument("EmpiricalMeasure: points/weights length mismatch");
    const std::size_t d = points_.front().size();
    if (d == 0) throw std::invalid_argument("EmpiricalMeasure: zero-dimensional points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].size() != d)
            throw std::invalid_argument("EmpiricalMeasure: inconsistent point dimensions");
        for (double c : points_[i])
            if (!std::isfinite(c)) throw std::invalid_argument("EmpiricalMeasure: non-finite point");
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
            throw std::invalid_argument("EmpiricalMeasure: weights must be nonnegative");
    }
    const double total = kahan_sum(weights_, weights_.size());
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("EmpiricalMeasure: weights must sum to 1 (got " +
                                    format_double(total) + ")");
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<Point> points) {
    if (points.empty()) throw std::invalid_argument("EmpiricalMeasure::uniform: no points");
    const double w = 1.0 / static_cast<double>(points.size());
    std::vector<double> weights(points.size(), w);
    // the last weight absorbs the rounding so the total is exactly 1
    weights.back() = 1.0 - kahan_sum(weights, weights.size() - 1);
    return EmpiricalMeasure(std::move(points), std::move(weights));
}

EmpiricalMeasure EmpiricalMeasure::from_scalars(const std::vector<double>& values) {
    std::vector<Point> pts;
    pts.reserve(values.size());
    for (double v : values) pts.push_back({v});
    return uniform(std::move(pts));
}

EmpiricalMeasure EmpiricalMeasure::from_scalars(const std::vector<double>& values,
                                                std::vector<double> weights) {
    std::vector<Point> pts;
    pts.reserve(values.size());
    for (double v : values) pts.push_back({v});
    return EmpiricalMeasure(std::move(pts), std::move(weights));
}

EmpiricalMeasure EmpiricalMeasure::dirac(Point point) {
    std::vector<Point> pts{std::move(point)};
    return EmpiricalMeasure(std::move(pts), {1.0});
}

double EmpiricalMeasure::scalar(std::size_t i) const {
    if (dim() != 1) throw std::invalid_argument("EmpiricalMeasure::scalar: dimension is not 1");
    return points_[i][0];
}

EmpiricalMeasure EmpiricalMeasure::deduplicated() const {
    std::map<Point, double> grouped;
    for (std::size_t i = 0; i < points_.size(); ++i) grouped[points_[i]] += weights_[i];
    std::vector<Point> pts;
    std::vector<double> ws;
    pts.reserve(grouped.size());
    ws.reserve(grouped.size());
    for (auto& [p, w] : grouped) {
        pts.push_back(p);
        ws.push_back(w);
    }
    ws.back() = 1.0 - kahan_sum(ws, ws.size() - 1);
    return EmpiricalMeasure(std::move(pts), std::move(ws));
}

double EmpiricalMeasure::mean_scalar() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * scalar(i);
    return m;
}

EmpiricalMeasure EmpiricalMeasure::read_csv(std::istream& in) {
    std::vector<Point> pts;
    std::vector<double> ws;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> fields;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) fields.push_back(std::stod(cell));
        if (fields.size() < 2)
            throw std::invalid_argument("EmpiricalMeasure::read_csv: need value[,value...],weight");
        ws.push_back(fields.back());
        fields.pop_back();
        pts.push_back(std::move(fields));
    }
    return EmpiricalMeasure(std::move(pts), std::move(ws));
}

EmpiricalMeasure EmpiricalMeasure::read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("EmpiricalMeasure: cannot open '" + path + "'");
    return read_csv(in);
}

void EmpiricalMeasure::write_csv(std::ostream& out) const {
    for (std::size_t i = 0; i < size(); ++i) {
        for (double c : points_[i]) out << format_double(c) << ',';
        out << format_double(weights_[i]) << '\n';
    }
}

void EmpiricalMeasure::write_csv_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("EmpiricalMeasure: cannot open '" + path + "' for writing");
    write_csv(out);
}

EmpiricalMeasure EmpiricalMeasure::from_json(const nlohmann::json& spec) {
    std::vector<Point> pts;
    for (const auto& p : spec.at("points")) {
        if (p.is_array())
            pts.push_back(p.get<Point>());
        else
            pts.push_back({p.get<double>()});
    }
    if (spec.contains("weights"))
        return EmpiricalMeasure(std::move(pts), spec.at("weights").get<std::vector<double>>());
    return uniform(std::move(pts));
}

nlohmann::json EmpiricalMeasure::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points_) {
        if (p.size() == 1)
            pts.push_back(p[0]);
        else
            pts.push_back(p);
    }
    return {{"points", std::move(pts)}, {"weights", weights_}};
}

}  // namespace subgeom::transport
