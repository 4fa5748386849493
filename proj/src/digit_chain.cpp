#include "subgeom/digit_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace subgeom::chains {

double digit_step(double x, Rng& rng) {
    return digit_step_with(x, static_cast<int>(rng.below(10)));
}

double digit_step_with(double x, int digit) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("digit_step: state must lie in the unit interval");
    if (digit < 0 || digit > 9) throw std::domain_error("digit_step: digit must be in 0..9");
    return (x + digit) / 10.0;
}

ReconstructResult digit_reconstruct(double x_n, int n) {
    if (n < 0) throw std::domain_error("digit_reconstruct: n must be >= 0");
    if (!(x_n >= 0.0 && x_n <= 1.0))
        throw std::domain_error("digit_reconstruct: state must lie in the unit interval");
    const double scale = std::pow(10.0, n);
    const double shifted = x_n * scale;
    ReconstructResult out;
    out.x0 = shifted - std::floor(shifted);
    // n rounding steps leave x_n with error ~ (n+1) eps/2, amplified by 10^n
    const double amplified_error = (n + 1) * 0.5 * std::numeric_limits<double>::epsilon() * scale;
    out.precision_warning = amplified_error > 1e-15 * scale;
    return out;
}

std::vector<double> digit_enumerate_marginal(double x0, int n) {
    if (n < 0) throw std::domain_error("digit_enumerate_marginal: n must be >= 0");
    if (n > 7) throw std::invalid_argument("digit_enumerate_marginal: 10^n outcomes too large");
    std::vector<double> states{x0};
    for (int step = 0; step < n; ++step) {
        std::vector<double> next;
        next.reserve(states.size() * 10);
        for (double s : states)
            for (int d = 0; d < 10; ++d) next.push_back(digit_step_with(s, d));
        states = std::move(next);
    }
    return states;
}

DecimalState DecimalState::parse(std::string_view text) {
    if (text.size() < 2 || text[0] != '0' || text[1] != '.')
        throw std::invalid_argument("DecimalState::parse: expected the form 0.d1d2...");
    DecimalState s;
    for (char c : text.substr(2)) {
        if (c < '0' || c > '9')
            throw std::invalid_argument("DecimalState::parse: non-digit character");
        s.digits_.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    while (!s.digits_.empty() && s.digits_.back() == 0) s.digits_.pop_back();
    return s;
}

DecimalState DecimalState::from_digits(std::vector<std::uint8_t> digits) {
    for (auto d : digits)
        if (d > 9) throw std::invalid_argument("DecimalState: digit out of range");
    DecimalState s;
    s.digits_ = std::move(digits);
    while (!s.digits_.empty() && s.digits_.back() == 0) s.digits_.pop_back();
    return s;
}

DecimalState DecimalState::step(int digit) const {
    if (digit < 0 || digit > 9) throw std::domain_error("DecimalState::step: digit out of range");
    DecimalState next;
    next.digits_.reserve(digits_.size() + 1);
    next.digits_.push_back(static_cast<std::uint8_t>(digit));
    next.digits_.insert(next.digits_.end(), digits_.begin(), digits_.end());
    while (!next.digits_.empty() && next.digits_.back() == 0) next.digits_.pop_back();
    return next;
}

DecimalState DecimalState::reconstruct(int n) const {
    if (n < 0) throw std::domain_error("DecimalState::reconstruct: n must be >= 0");
    DecimalState out;
    if (static_cast<std::size_t>(n) < digits_.size())
        out.digits_.assign(digits_.begin() + n, digits_.end());
    return out;
}

double DecimalState::to_double() const {
    double value = 0.0;
    for (auto it = digits_.rbegin(); it != digits_.rend(); ++it) value = (value + *it) / 10.0;
    return value;
}

std::string DecimalState::to_string() const {
    std::string out = "0.";
    if (digits_.empty()) return out + "0";
    for (auto d : digits_) out.push_back(static_cast<char>('0' + d));
    return out;
}

bool DecimalState::operator==(const DecimalState& other) const {
    return digits_ == other.digits_;
}

bool DecimalState::operator<(const DecimalState& other) const {
    const std::size_t len = std::max(digits_.size(), other.digits_.size());
    for (std::size_t i = 0; i < len; ++i) {
        const int a = i < digits_.size() ? digits_[i] : 0;
        const int b = i < other.digits_.size() ? other.digits_[i] : 0;
        if (a != b) return a < b;
    }
    return false;
}

std::vector<DecimalState> digit_enumerate_exact(const DecimalState& x0, int n) {
    if (n < 0) throw std::domain_error("digit_enumerate_exact: n must be >= 0");
    if (n > 6) throw std::invalid_argument("digit_enumerate_exact: 10^n outcomes too large");
    std::vector<DecimalState> states{x0};
    for (int step = 0; step < n; ++step) {
        std::vector<DecimalState> next;
        next.reserve(states.size() * 10);
        for (const auto& s : states)
            for (int d = 0; d < 10; ++d) next.push_back(s.step(d));
        states = std::move(next);
    }
    return states;
}

}  // namespace subgeom::chains
