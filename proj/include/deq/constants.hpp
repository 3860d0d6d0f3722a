#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "deq/dynamics.hpp"
#include "deq/risk.hpp"

namespace deq {

/// Parameter region Theta = {||theta1|| <= (1+delta1)||xi||, |theta2| <= delta2}
/// over which the nonlinear constants take their inf/sup.
struct ParamRegion {
    double delta1 = 0.1;
    double delta2 = 1.0;
    double norm_xi = 1.0;

    double theta1_radius() const { return (1.0 + delta1) * norm_xi; }

    void require_contractive(const Activation& activation) const {
        if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw InputError("region deltas must be > 0");
        if (!(activation.lipschitz_bound() * delta2 < 1.0))
            throw ContractionError("region: L * delta2 >= 1");
    }
};

/// Limit of linear-model gradient flow, in the conservation-consistent form:
/// theta_inf = (a*xi, 1-a) with a = sign(1-theta2(0)) * sqrt(w(0) / (||xi||^2+1)).
/// The point lies on the sphere {w = w(0)} and on the solution line, on the
/// same side of theta2 = 1 as the start.
inline Parameter limit_point_linear(const Parameter& theta0, const Vector& xi) {
    const double gap = 1.0 - theta0.theta2;
    if (gap == 0.0) throw SingularityError("limit_point_linear: theta2(0) = 1");
    const double w0 = dist2_to_trivial(theta0);
    const double a = (gap > 0.0 ? 1.0 : -1.0) * std::sqrt(w0 / (xi.squaredNorm() + 1.0));
    Parameter out;
    out.theta1 = a * xi;
    out.theta2 = 1.0 - a;
    return out;
}

/// Certified infimum of act' over [-radius, radius]: grid of 1e5 points
/// including both endpoints, then a local ternary refinement around the
/// grid minimum. Exact for the supported activations, whose derivatives
/// are unimodal.
inline double gamma_inf(const Activation& activation, double radius, int grid_points = 100001) {
    if (radius < 0.0) throw InputError("gamma_inf: radius must be >= 0");
    if (radius == 0.0) return activation.derivative(0.0);
    double best = activation.derivative(-radius);
    int best_i = 0;
    for (int i = 1; i < grid_points; ++i) {
        const double z = -radius + 2.0 * radius * i / (grid_points - 1);
        const double v = activation.derivative(z);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    const double cell = 2.0 * radius / (grid_points - 1);
    double lo = -radius + cell * std::max(0, best_i - 1);
    double hi = -radius + cell * std::min(grid_points - 1, best_i + 1);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * radius; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (activation.derivative(m1) < activation.derivative(m2))
            hi = m2;
        else
            lo = m1;
    }
    return std::min(best, activation.derivative(0.5 * (lo + hi)));
}

/// Uniform bound on the equilibrium output over the region:
/// M = (|act(0)| + L alpha (1+delta1) ||xi||) / (1 - L delta2).
inline double constant_M(const Activation& activation, double alpha, double delta1,
                         double delta2, double norm_xi) {
    const double lip = activation.lipschitz_bound();
    if (!(lip * delta2 < 1.0)) throw ContractionError("constant_M: L * delta2 >= 1");
    return (std::abs(activation.value(0.0)) + lip * alpha * (1.0 + delta1) * norm_xi) /
           (1.0 - lip * delta2);
}

/// Preactivation radius alpha (1+delta1) ||xi|| + M delta2 over which the
/// derivative infimum gamma is taken.
inline double preactivation_radius(const Activation& activation, const ParamRegion& region,
                                   double alpha) {
    const double m = constant_M(activation, alpha, region.delta1, region.delta2, region.norm_xi);
    return alpha * region.theta1_radius() + m * region.delta2;
}

namespace detail {

/// Axis-aligned grid over Theta; points with ||theta1|| beyond the region
/// ball are dropped.
inline std::vector<Parameter> region_grid(const ParamRegion& region, int d, int grid_n) {
    if (grid_n < 2) throw InputError("region grid needs >= 2 points per axis");
    const double a = region.theta1_radius();
    std::vector<double> axis(grid_n);
    for (int i = 0; i < grid_n; ++i) axis[i] = -a + 2.0 * a * i / (grid_n - 1);
    std::vector<double> t2_axis(grid_n);
    for (int i = 0; i < grid_n; ++i)
        t2_axis[i] = -region.delta2 + 2.0 * region.delta2 * i / (grid_n - 1);

    std::vector<Parameter> grid;
    std::vector<int> idx(d, 0);
    while (true) {
        Vector t1(d);
        for (int k = 0; k < d; ++k) t1(k) = axis[idx[k]];
        if (t1.norm() <= a * (1.0 + 1e-12)) {
            for (double t2 : t2_axis) grid.emplace_back(t1, t2);
        }
        int k = 0;
        while (k < d && ++idx[k] == grid_n) idx[k++] = 0;
        if (k == d) break;
    }
    return grid;
}

struct SolvedSamples {
    std::vector<Vector> x;
    std::vector<double> y;
    std::vector<bool> in_ball;  // ||x|| <= alpha
};

inline SolvedSamples solve_over_samples(const Parameter& theta, const Activation& activation,
                                        const std::vector<Vector>& samples, double alpha) {
    SolvedSamples out;
    out.x = samples;
    out.y.reserve(samples.size());
    out.in_ball.reserve(samples.size());
    SolverConfig config;
    for (const auto& x : samples) {
        out.y.push_back(picard_solve(theta, activation, x, config).y);
        out.in_ball.push_back(x.norm() <= alpha);
    }
    return out;
}

}  // namespace detail

struct RhoEstimate {
    double rho = 0.0;
    double standard_error = 0.0;  // MC error of the minimizing quadratic form
    int grid_n = 0;
    std::int64_t n_mc = 0;
};

/// Grid-plus-Monte-Carlo estimate of
///   rho = inf_{theta in Theta} lambda_min E[(X; y_theta(X)) (X; y_theta(X))^T 1{||X|| <= alpha}].
/// The expectation uses a fixed seeded sample set; the reported standard
/// error is that of the quadratic form at the minimizing grid point and
/// eigenvector. A linear activation makes the matrix singular and the
/// estimate collapses to ~0, which flags the nonlinear theory as
/// inapplicable.
inline RhoEstimate rho_estimate(const ParamRegion& region, const TargetModel& target,
                                const Activation& activation, const DataModel& data,
                                double alpha, int grid_n, std::int64_t n_mc) {
    region.require_contractive(activation);
    if (n_mc < 2) throw InputError("rho_estimate: n_mc must be >= 2");
    const auto samples = data.sample(n_mc);
    const auto n = static_cast<double>(samples.size());
    const int d = data.dimension;

    RhoEstimate out;
    out.grid_n = grid_n;
    out.n_mc = static_cast<std::int64_t>(samples.size());
    out.rho = std::numeric_limits<double>::infinity();

    for (const Parameter& theta : detail::region_grid(region, d, grid_n)) {
        const auto solved = detail::solve_over_samples(theta, activation, samples, alpha);
        Matrix m = Matrix::Zero(d + 1, d + 1);
        Vector z(d + 1);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!solved.in_ball[i]) continue;
            z.head(d) = solved.x[i];
            z(d) = solved.y[i];
            m += z * z.transpose();
        }
        m /= n;
        Eigen::SelfAdjointEigenSolver<Matrix> es(m);
        const double lmin = es.eigenvalues().minCoeff();
        if (lmin < out.rho) {
            out.rho = lmin;
            // sample variance of (u^T z)^2 1{||x|| <= alpha} at the minimizer
            Eigen::Index argmin = 0;
            es.eigenvalues().minCoeff(&argmin);
            const Vector u = es.eigenvectors().col(argmin);
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                double q = 0.0;
                if (solved.in_ball[i]) {
                    z.head(d) = solved.x[i];
                    z(d) = solved.y[i];
                    const double uz = u.dot(z);
                    q = uz * uz;
                }
                s1 += q;
                s2 += q * q;
            }
            const double mean = s1 / n;
            const double var = std::max(0.0, s2 / n - mean * mean);
            out.standard_error = std::sqrt(var / n);
        }
    }
    return out;
}

struct NonlinearConstants {
    double M = 0.0;
    double gamma = 0.0;
    RhoEstimate rho;
    double lambda1 = 0.0;       // 2 rho gamma^2 / (1 + L delta2)
    double lambda2 = 0.0;       // 4 L^2 (L/(1-L delta2))^2 sup E||(X;y)||^4
    double eta_max = 0.0;       // lambda1 / (2 lambda2)
    double flow_rate = 0.0;     // lambda1, the flow decay exponent
    bool applicable = false;    // rho above the degeneracy threshold
};

/// All constants of the local nonlinear convergence theory over one region,
/// data model and truncation radius. rho and the fourth-moment supremum
/// share the same theta-grid and sample set.
inline NonlinearConstants nonlinear_constants(const ParamRegion& region,
                                              const TargetModel& target,
                                              const Activation& activation,
                                              const DataModel& data, double alpha, int grid_n,
                                              std::int64_t n_mc) {
    region.require_contractive(activation);
    NonlinearConstants out;
    const double lip = activation.lipschitz_bound();
    out.M = constant_M(activation, alpha, region.delta1, region.delta2, region.norm_xi);
    out.gamma = gamma_inf(activation, preactivation_radius(activation, region, alpha));
    out.rho = rho_estimate(region, target, activation, data, alpha, grid_n, n_mc);

    const auto samples = data.sample(n_mc);
    const int d = data.dimension;
    double sup4 = 0.0;
    for (const Parameter& theta : detail::region_grid(region, d, grid_n)) {
        const auto solved = detail::solve_over_samples(theta, activation, samples, alpha);
        double acc = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double n2 = solved.x[i].squaredNorm() + solved.y[i] * solved.y[i];
            acc += n2 * n2;
        }
        sup4 = std::max(sup4, acc / static_cast<double>(samples.size()));
    }

    out.lambda1 = 2.0 * out.rho.rho * out.gamma * out.gamma / (1.0 + lip * region.delta2);
    const double amp = lip / (1.0 - lip * region.delta2);
    out.lambda2 = 4.0 * lip * lip * amp * amp * sup4;
    out.eta_max = out.lambda2 > 0.0 ? out.lambda1 / (2.0 * out.lambda2) : 0.0;
    out.flow_rate = out.lambda1;
    out.applicable = out.rho.rho > 1e-8;
    return out;
}

/// (lambda1, lambda2, eta_max) of the nonlinear gradient-descent theory.
inline NonlinearConstants gd_constants_nonlinear(const ParamRegion& region,
                                                 const TargetModel& target,
                                                 const Activation& activation,
                                                 const DataModel& data, double alpha,
                                                 int grid_n, std::int64_t n_mc) {
    return nonlinear_constants(region, target, activation, data, alpha, grid_n, n_mc);
}

struct LinearGdConstants {
    double c0 = 0.0;          // sqrt(R(theta0) / lambda_min)
    double beta_lemma = 0.0;  // invariant-set floor on |1 - theta2|
    double eta0 = 0.0;        // admissible step ceiling
    double kappa = 0.0;       // lambda_max / lambda_min
    double alpha = 0.0;       // 2 sqrt(w(0))
    double lipschitz_hat = 0.0;
    double risk0 = 0.0;
    double w0 = 0.0;
};

/// Per-step risk contraction factor 1 - eta / (kappa alpha^2).
inline double gd_linear_factor(const LinearGdConstants& c, double eta) {
    return 1.0 - eta / (c.kappa * c.alpha * c.alpha);
}

/// Constants of the linear gradient-descent theory: invariant-set floor
/// beta, condition number kappa, and step ceiling
/// eta0 = min{1/L_hat, beta/2, beta^2/(4 R(theta0))}. The gradient
/// Lipschitz constant over the inflated invariant set has no closed form;
/// it is estimated from difference quotients over random pairs and
/// inflated by 2x.
inline LinearGdConstants gd_constants_linear(const Parameter& theta0, const TargetModel& target,
                                             const MomentSummary& moments,
                                             std::uint64_t seed = 2024,
                                             std::int64_t n_pairs = 10000) {
    if (!(moments.lambda_min() > 0.0))
        throw RankError("gd_constants_linear: Sigma is not positive definite");
    if (theta0.theta2 == 1.0) throw SingularityError("gd_constants_linear: theta2(0) = 1");

    LinearGdConstants out;
    out.risk0 = linear_risk(theta0, target, moments);
    out.w0 = dist2_to_trivial(theta0);
    out.kappa = moments.lambda_max() / moments.lambda_min();
    out.alpha = 2.0 * std::sqrt(out.w0);
    out.c0 = std::sqrt(out.risk0 / moments.lambda_min());
    const double sqrt_w0 = std::sqrt(out.w0);
    out.beta_lemma = std::min(std::abs(1.0 - theta0.theta2),
                              sqrt_w0 / (std::sqrt(2.0) * (out.c0 + target.xi.norm() + 1.0)));

    // Difference quotients over the inflated set
    // {beta/2 <= |1-theta2| <= 2 sqrt(w0) + beta/2, ||theta1|| <= 2 sqrt(w0) + beta/2}.
    const double beta = out.beta_lemma;
    const double hi_gap = 2.0 * sqrt_w0 + 0.5 * beta;
    const double t1_radius = 2.0 * sqrt_w0 + 0.5 * beta;
    const int d = theta0.dim();
    Rng rng = Rng::for_stream(seed, kStreamRegion);
    auto draw = [&]() {
        Parameter p;
        p.theta1 = rng.ball_vec(d, t1_radius);
        const double gap = rng.uniform(0.5 * beta, hi_gap);
        const double side = rng.uniform01() < 0.5 ? 1.0 : -1.0;
        p.theta2 = 1.0 - side * gap;
        return p;
    };
    double lip_hat = 0.0;
    for (std::int64_t i = 0; i < n_pairs; ++i) {
        const Parameter pa = draw();
        Parameter pb;
        if (i % 2 == 0) {
            pb = draw();
            if ((1.0 - pa.theta2 > 0.0) != (1.0 - pb.theta2 > 0.0)) continue;
        } else {
            // nearby pair on the same side, to probe local steepness
            pb = pa;
            pb.theta1 += rng.ball_vec(d, 1e-4);
            pb.theta2 += rng.uniform(-1e-4, 1e-4);
            const double gap = 1.0 - pb.theta2;
            if (std::abs(gap) < 0.5 * beta || (gap > 0.0) != (1.0 - pa.theta2 > 0.0)) continue;
        }
        const Vector ga = linear_risk_grad(pa, target, moments).flat();
        const Vector gb = linear_risk_grad(pb, target, moments).flat();
        const double dist = (pa.flat() - pb.flat()).norm();
        if (dist > 0.0) lip_hat = std::max(lip_hat, (ga - gb).norm() / dist);
    }
    out.lipschitz_hat = 2.0 * lip_hat;  // safety inflation
    out.eta0 = std::min({1.0 / out.lipschitz_hat, 0.5 * beta,
                         beta * beta / (4.0 * out.risk0)});
    return out;
}

}  // namespace deq
