#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "deq/data.hpp"
#include "deq/model.hpp"
#include "deq/solver.hpp"

namespace deq {

namespace detail {

inline double one_minus_theta2_checked(const Parameter& param) {
    const double denom = 1.0 - param.theta2;
    if (std::abs(denom) < kSingularEps)
        throw SingularityError("risk: |1 - theta2| < eps");
    return denom;
}

}  // namespace detail

/// Effective linear predictor phi = theta1 / (1 - theta2).
inline Vector effective_predictor(const Parameter& param) {
    return param.theta1 / detail::one_minus_theta2_checked(param);
}

/// Population risk of the linear model, (phi - xi)^T Sigma (phi - xi).
inline double linear_risk(const Parameter& param, const TargetModel& target,
                          const MomentSummary& moments) {
    const Vector diff = effective_predictor(param) - target.xi;
    return diff.dot(moments.sigma_matrix() * diff);
}

/// Gradient of the linear-model population risk. Both blocks share the
/// vector Sigma (phi - xi), which makes the identity
/// theta1 . grad1 = (1 - theta2) * grad2 hold to rounding.
inline Parameter linear_risk_grad(const Parameter& param, const TargetModel& target,
                                  const MomentSummary& moments) {
    const double denom = detail::one_minus_theta2_checked(param);
    const Vector phi = param.theta1 / denom;
    const Vector v = moments.sigma_matrix() * (phi - target.xi);
    Parameter grad;
    grad.theta1 = (2.0 / denom) * v;
    grad.theta2 = (2.0 / (denom * denom)) * param.theta1.dot(v);
    return grad;
}

/// Parameter gradient of the equilibrium output via the implicit function
/// theorem: grad_theta y = s / (1 - theta2 * s) * (x; y), s = act'(omega).
inline Parameter implicit_output_grad(const Parameter& param, const Activation& activation,
                                      const Vector& x, const FixedPointResult& fp) {
    const double s = activation.derivative(fp.preactivation);
    const double denom = 1.0 - param.theta2 * s;
    if (denom < kSingularEps)
        throw SingularityError("implicit_output_grad: 1 - theta2*act' < eps");
    const double factor = s / denom;
    Parameter grad;
    grad.theta1 = factor * x;
    grad.theta2 = factor * fp.y;
    return grad;
}

/// Mean squared residual over a fixed sample list, sequential order.
inline double empirical_risk(const Parameter& param, const TargetModel& target,
                             const Activation& activation, const std::vector<Vector>& samples,
                             const SolverConfig& config = {}) {
    if (samples.empty()) throw InputError("empirical_risk: empty sample set");
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        try {
            const FixedPointResult fp = solve_equilibrium(param, activation, samples[i], config);
            const double resid = fp.y - target(samples[i]);
            acc += resid * resid;
        } catch (const std::exception& e) {
            throw NoConvergenceError("empirical_risk: sample " + std::to_string(i) + ": " +
                                     e.what());
        }
    }
    return acc / static_cast<double>(samples.size());
}

/// Gradient of empirical_risk: mean of 2 (y - f(x)) grad_theta y, assembled
/// per sample in sequential order so runs are bit-reproducible.
inline Parameter empirical_risk_grad(const Parameter& param, const TargetModel& target,
                                     const Activation& activation,
                                     const std::vector<Vector>& samples,
                                     const SolverConfig& config = {}) {
    if (samples.empty()) throw InputError("empirical_risk_grad: empty sample set");
    Parameter acc;
    acc.theta1 = Vector::Zero(param.dim());
    acc.theta2 = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        try {
            const FixedPointResult fp = solve_equilibrium(param, activation, samples[i], config);
            const Parameter g = implicit_output_grad(param, activation, samples[i], fp);
            const double scale = 2.0 * (fp.y - target(samples[i]));
            acc.theta1 += scale * g.theta1;
            acc.theta2 += scale * g.theta2;
        } catch (const std::exception& e) {
            throw NoConvergenceError("empirical_risk_grad: sample " + std::to_string(i) + ": " +
                                     e.what());
        }
    }
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    acc.theta1 *= inv_n;
    acc.theta2 *= inv_n;
    return acc;
}

using RiskFn = std::function<double(const Parameter&)>;

/// Central-difference gradient of an arbitrary risk function. Test oracle;
/// never used on any production path.
inline Parameter fd_grad(const RiskFn& riskfn, const Parameter& param, double h) {
    if (!(h > 0.0)) throw InputError("fd_grad: h must be > 0");
    const Vector flat = param.flat();
    Vector grad(flat.size());
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        Vector lo = flat, hi = flat;
        lo(i) -= h;
        hi(i) += h;
        grad(i) = (riskfn(Parameter::from_flat(hi)) - riskfn(Parameter::from_flat(lo))) /
                  (2.0 * h);
    }
    return Parameter::from_flat(grad);
}

}  // namespace deq
