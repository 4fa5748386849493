#pragma once

// Test-only reference implementations, kept independent of the library's
// quadrature and solver paths on purpose: the tests compare against these.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracles {

/// Composite Simpson with interval doubling until two refinements agree.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-12) {
    auto pass = [&](int n) {
        const double h = (b - a) / n;
        double sum = f(a) + f(b);
        for (int i = 1; i < n; i += 2) sum += 4.0 * f(a + i * h);
        for (int i = 2; i < n; i += 2) sum += 2.0 * f(a + i * h);
        return sum * h / 3.0;
    };
    double prev = pass(64);
    for (int n = 128; n <= (1 << 22); n *= 2) {
        const double cur = pass(n);
        if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

/// Bisection inverse of an increasing function on [lo, hi].
inline double bisect_increasing(const std::function<double(double)>& F, double y, double lo,
                                double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (F(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Exact optimal transport between equal-weight n-point sets by exhausting
/// all permutation plans (Birkhoff vertices); n <= 8.
inline double brute_force_permutation_ot(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += cost[i][perm[i]];
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(n);
}

/// Decimal-string oracle for the digit chain: inserting digit d after the
/// decimal point of 0.s yields 0.ds.
inline std::string insert_digit(const std::string& state, int digit) {
    // state is "0.xyz"; result "0.dxyz"
    std::string out = "0.";
    out.push_back(static_cast<char>('0' + digit));
    out += state.substr(2);
    return out;
}

inline double decimal_to_double(const std::string& state) {
    double value = 0.0;
    for (auto it = state.rbegin(); it != state.rend() && *it != '.'; ++it)
        value = (value + (*it - '0')) / 10.0;
    return value;
}

}  // namespace oracles
