#pragma once

#include <stdexcept>
#include <string>

namespace subgeom {

/// Quadrature or root finding failed to reach its tolerance within the
/// iteration budget.
struct NonconvergenceError : std::runtime_error {
    explicit NonconvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A simulated trajectory left the numerically trusted region.
struct BlowUpError : std::runtime_error {
    explicit BlowUpError(const std::string& what) : std::runtime_error(what) {}
};

/// A least-squares fit had no information to work with (e.g. a flat curve).
struct DegenerateFitError : std::runtime_error {
    explicit DegenerateFitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace subgeom
