#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "subgeom/rng.hpp"

namespace subgeom::chains {

/**
 * The digit-shift autoregression X_{n+1} = X_n / 10 + eps_{n+1} with eps
 * uniform on {0, 0.1, ..., 0.9}: one step inserts a uniform digit right
 * after the decimal point.  Its invariant law is Uniform[0,1), approached
 * geometrically in W_1 while staying at full total-variation distance.
 */

/// One step with a drawn digit.  Domain is the closed unit interval; the
/// open interval [0,1) is forward-invariant.
double digit_step(double x, Rng& rng);

/// One step with a chosen digit in {0,...,9}.
double digit_step_with(double x, int digit);

struct ReconstructResult {
    double x0;
    bool precision_warning;  // set when 10^n amplification exceeds double accuracy
};

/// Recover the initial state from the n-step state: X_0 = frac(10^n X_n).
/// Exact only in exact arithmetic; see DecimalState for the float-free path.
ReconstructResult digit_reconstruct(double x_n, int n);

/// All 10^n equally likely n-step outcomes from x0, in digit-lexicographic
/// order, computed by the same (x + k)/10 recursion as digit_step.
std::vector<double> digit_enumerate_marginal(double x0, int n);

/**
 * Exact state of the digit chain as a finite decimal string 0.d1 d2 ...
 * Steps, reconstruction and support comparisons are exact, which is what the
 * reconstruction and TV-singularity checks require; doubles only enter when
 * explicitly converted.
 */
class DecimalState {
  public:
    DecimalState() = default;
    static DecimalState parse(std::string_view text);  // "0.325"
    static DecimalState from_digits(std::vector<std::uint8_t> digits);

    DecimalState step(int digit) const;        // insert digit after the point
    DecimalState reconstruct(int n) const;     // drop the first n digits
    double to_double() const;
    std::string to_string() const;
    const std::vector<std::uint8_t>& digits() const { return digits_; }

    bool operator==(const DecimalState& other) const;
    bool operator<(const DecimalState& other) const;

  private:
    std::vector<std::uint8_t> digits_;  // trailing zeros trimmed
};

/// All 10^n outcomes from x0 in exact decimal arithmetic.
std::vector<DecimalState> digit_enumerate_exact(const DecimalState& x0, int n);

}  // namespace subgeom::chains
