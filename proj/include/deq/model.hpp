#pragma once

#include <cmath>
#include <cstdint>

#include "deq/activation.hpp"
#include "deq/types.hpp"

namespace deq {

/// Ground-truth single-index relation f(x) = act(xi . x); with the linear
/// activation this is the plain linear target f(x) = xi . x.
struct TargetModel {
    Vector xi;
    Activation activation = Activation::linear();

    TargetModel(Vector xi_, Activation act) : xi(std::move(xi_)), activation(act) {
        if (xi.size() == 0 || xi.norm() == 0.0)
            throw InputError("target index xi must be nonzero");
    }

    double operator()(const Vector& x) const {
        return activation.value(xi.dot(x));
    }
};

/// Output of an equilibrium solve: y satisfies y = act(theta1.x + theta2*y)
/// up to the solver tolerance; preactivation = theta1.x + theta2*y.
struct FixedPointResult {
    double y = 0.0;
    double preactivation = 0.0;
    double residual = 0.0;
    std::int64_t iterations = 0;
};

/// One application of the implicit map: act(theta1 . x + theta2 * y).
inline double eval_g(const Parameter& param, const Activation& activation,
                     const Vector& x, double y) {
    if (x.size() != param.theta1.size())
        throw InputError("eval_g: input dimension does not match theta1");
    return activation.value(param.theta1.dot(x) + param.theta2 * y);
}

/// Equilibrium output of the linear model, theta1.x / (1 - theta2).
/// Guards the singular hyperplane theta2 = 1.
inline double closed_form_linear_output(const Parameter& param, const Vector& x) {
    if (x.size() != param.theta1.size())
        throw InputError("closed_form_linear_output: dimension mismatch");
    const double denom = 1.0 - param.theta2;
    if (std::abs(denom) < kSingularEps)
        throw SingularityError("linear model singular: |1 - theta2| < eps");
    return param.theta1.dot(x) / denom;
}

/// Lipschitz modulus of g(x, .) in its second argument. Values >= 1 mean the
/// Picard iteration has no contraction certificate.
inline double contraction_modulus(const Parameter& param, const Activation& activation) {
    return activation.lipschitz_bound() * std::abs(param.theta2);
}

}  // namespace deq
