#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace deq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Guard below which |1 - theta2| (and the implicit-function denominator)
// counts as singular. Reaching it during a flow indicates integrator misuse
// and must be loud.
inline constexpr double kSingularEps = 1e-8;

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularityError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ContractionError : std::domain_error {
    using std::domain_error::domain_error;
};

struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Model parameter theta = (theta1 in R^d, theta2 in R).
/// theta1 couples the input, theta2 is the self-coupling of the
/// equilibrium output.
struct Parameter {
    Vector theta1;
    double theta2 = 0.0;

    Parameter() = default;
    Parameter(Vector t1, double t2) : theta1(std::move(t1)), theta2(t2) {}

    int dim() const { return static_cast<int>(theta1.size()); }

    // Flat layout [theta1; theta2], used by integrators and FD loops.
    Vector flat() const {
        Vector v(theta1.size() + 1);
        v.head(theta1.size()) = theta1;
        v(theta1.size()) = theta2;
        return v;
    }

    static Parameter from_flat(const Vector& v) {
        Parameter p;
        p.theta1 = v.head(v.size() - 1);
        p.theta2 = v(v.size() - 1);
        return p;
    }
};

/// Squared distance to the trivial point (0, ..., 0, 1), the conserved
/// quantity of linear-model gradient flow.
inline double dist2_to_trivial(const Parameter& p) {
    return p.theta1.squaredNorm() + (p.theta2 - 1.0) * (p.theta2 - 1.0);
}

/// Squared distance to the target parameter (xi, 0).
inline double dist2_to_target(const Parameter& p, const Vector& xi) {
    return (p.theta1 - xi).squaredNorm() + p.theta2 * p.theta2;
}

}  // namespace deq
