#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "deq/model.hpp"

namespace deq {

enum class SolverMethod { Picard, Brent };

struct SolverConfig {
    double tolerance = 1e-12;           // absolute bound on |y - g(x, y)|
    std::int64_t max_iterations = 100000;
    SolverMethod method = SolverMethod::Picard;
};

namespace detail {

inline void check_solver_config(const SolverConfig& config) {
    if (!(config.tolerance > 0.0)) throw InputError("solver tolerance must be > 0");
    if (config.max_iterations < 1) throw InputError("max_iterations must be >= 1");
}

}  // namespace detail

/// Default warm start for the fixed-point iteration: the exact solution at
/// theta2 = 0.
inline double picard_default_start(const Parameter& param, const Activation& activation,
                                   const Vector& x) {
    return activation.value(param.theta1.dot(x));
}

/// Fixed-point iteration y <- g(x, y). Requires a contraction certificate
/// L*|theta2| < 1; stops once successive iterates differ by at most the
/// tolerance, which bounds the returned residual by q * tolerance.
/// `residual_log`, when given, records |y_{t+1} - y_t| per iteration.
inline FixedPointResult picard_solve(const Parameter& param, const Activation& activation,
                                     const Vector& x, double y0, const SolverConfig& config,
                                     std::vector<double>* residual_log = nullptr) {
    detail::check_solver_config(config);
    const double q = contraction_modulus(param, activation);
    if (!(q < 1.0))
        throw ContractionError("picard_solve: contraction modulus " + std::to_string(q) +
                               " >= 1");
    const double base = param.theta1.dot(x);
    double y = y0;
    for (std::int64_t it = 1; it <= config.max_iterations; ++it) {
        const double y_next = activation.value(base + param.theta2 * y);
        const double delta = std::abs(y_next - y);
        if (residual_log) residual_log->push_back(delta);
        y = y_next;
        if (delta <= config.tolerance) {
            FixedPointResult out;
            out.y = y;
            out.preactivation = base + param.theta2 * y;
            out.residual = std::abs(activation.value(out.preactivation) - y);
            out.iterations = it;
            return out;
        }
    }
    throw NoConvergenceError("picard_solve: no convergence within max_iterations");
}

inline FixedPointResult picard_solve(const Parameter& param, const Activation& activation,
                                     const Vector& x, const SolverConfig& config = {}) {
    return picard_solve(param, activation, x, picard_default_start(param, activation, x),
                        config);
}

/// Symmetric bracket [-B, B] that provably contains the equilibrium:
/// B = 1.01 * (|act(0)| + L ||theta1|| ||x||) / (1 - L |theta2|).
inline std::pair<double, double> bracket_from_bound(const Parameter& param,
                                                    const Activation& activation,
                                                    const Vector& x) {
    const double q = contraction_modulus(param, activation);
    if (!(q < 1.0))
        throw ContractionError("bracket_from_bound: contraction modulus >= 1");
    const double lip = activation.lipschitz_bound();
    const double numer = std::abs(activation.value(0.0)) + lip * param.theta1.norm() * x.norm();
    const double bound = 1.01 * numer / (1.0 - q);
    return {-bound, bound};
}

/// Classic Brent root finder (inverse quadratic / secant / bisection with
/// the usual safeguards). Terminates when |f| <= ftol or when the interval
/// shrinks below a machine-epsilon-scaled width. Returns (root, f(root),
/// iterations).
template <class F>
std::tuple<double, double, std::int64_t> brent_root(F&& f, double a, double b, double ftol,
                                                    std::int64_t max_iterations) {
    double fa = f(a);
    double fb = f(b);
    if (std::abs(fa) <= ftol) return {a, fa, 0};
    if (std::abs(fb) <= ftol) return {b, fb, 0};
    if ((fa > 0.0) == (fb > 0.0))
        throw BracketError("brent_root: endpoints have the same sign");

    double c = a, fc = fa;
    double d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();

    for (std::int64_t it = 1; it <= max_iterations; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * eps;
        const double xm = 0.5 * (c - b);
        if (std::abs(fb) <= ftol || std::abs(xm) <= tol1) return {b, fb, it};

        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // attempt interpolation
            const double s = fb / fa;
            double p, qd;
            if (a == c) {
                p = 2.0 * xm * s;
                qd = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                qd = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) qd = -qd;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * qd - std::abs(tol1 * qd), std::abs(e * qd))) {
                e = d;
                d = p / qd;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw NoConvergenceError("brent_root: no convergence within max_iterations");
}

/// Equilibrium solve via Brent's method on h(y) = y - g(x, y) over the
/// bracket from bracket_from_bound.
inline FixedPointResult brent_solve(const Parameter& param, const Activation& activation,
                                    const Vector& x, const SolverConfig& config = {}) {
    detail::check_solver_config(config);
    const auto [lo, hi] = bracket_from_bound(param, activation, x);
    const double base = param.theta1.dot(x);
    auto h = [&](double y) { return y - activation.value(base + param.theta2 * y); };
    const auto [root, hval, iters] = brent_root(h, lo, hi, config.tolerance,
                                                config.max_iterations);
    FixedPointResult out;
    out.y = root;
    out.preactivation = base + param.theta2 * root;
    out.residual = std::abs(hval);
    out.iterations = iters;
    return out;
}

/// Dispatch on the configured method.
inline FixedPointResult solve_equilibrium(const Parameter& param, const Activation& activation,
                                          const Vector& x, const SolverConfig& config = {}) {
    return config.method == SolverMethod::Brent
               ? brent_solve(param, activation, x, config)
               : picard_solve(param, activation, x, config);
}

}  // namespace deq
