#pragma once

// Test-only oracles, kept independent of the solver implementations they
// cross-check: plain bisection for fixed points, and frozen reference
// values computed from it at high precision.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

/// Plain bisection on [lo, hi]; requires a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-13) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw std::runtime_error("bisect: no sign change");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((flo > 0.0) == (fm > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Frozen values (30-digit bisection / closed forms).
inline constexpr double kSigmoidOfOne = 0.7310585786300049;        // sigmoid(1)
inline constexpr double kSigmoidPrimeOfOne = 0.19661193324148185;  // sigmoid'(1)
inline constexpr double kFixSigmoidHalfY = 0.5708793216535328;     // y = sigmoid(0.5 y)
inline constexpr double kFixSigmoidShifted = 0.9213381677870859;   // y = sigmoid(2 + 0.5 y)
inline constexpr double kTanhPrimeOfOne = 0.41997434161402614;     // 1 - tanh(1)^2
inline constexpr double kLimitAlpha = 0.40496913462633174;         // sqrt(0.82 / 5)

}  // namespace oracle
