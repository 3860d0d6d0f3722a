#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "deq/risk.hpp"

namespace deq {

/// Risk plus gradient of one training objective. `linear_phi` marks the
/// linear model, for which the trajectory records phi = theta1/(1-theta2).
struct RiskObjective {
    std::function<double(const Parameter&)> risk;
    std::function<Parameter(const Parameter&)> grad;
    bool linear_phi = false;
};

inline RiskObjective make_linear_objective(const TargetModel& target,
                                           const MomentSummary& moments) {
    RiskObjective obj;
    obj.risk = [target, moments](const Parameter& p) { return linear_risk(p, target, moments); };
    obj.grad = [target, moments](const Parameter& p) {
        return linear_risk_grad(p, target, moments);
    };
    obj.linear_phi = true;
    return obj;
}

inline RiskObjective make_empirical_objective(const TargetModel& target,
                                              const Activation& activation,
                                              std::vector<Vector> samples,
                                              const SolverConfig& config = {}) {
    RiskObjective obj;
    auto shared = std::make_shared<std::vector<Vector>>(std::move(samples));
    obj.risk = [target, activation, shared, config](const Parameter& p) {
        return empirical_risk(p, target, activation, *shared, config);
    };
    obj.grad = [target, activation, shared, config](const Parameter& p) {
        return empirical_risk_grad(p, target, activation, *shared, config);
    };
    obj.linear_phi = false;
    return obj;
}

enum class RunStatus { Completed, GuardTripped };

/// Time-indexed record of a flow or descent run. For gradient descent,
/// times hold the step indices. phi stays empty for nonlinear models.
struct Trajectory {
    std::vector<double> times;
    std::vector<Parameter> params;
    std::vector<double> risk;
    std::vector<double> w;   // ||theta - (0,1)||^2
    std::vector<double> r;   // ||theta - (xi,0)||^2
    std::vector<double> grad_norm_sq;
    std::vector<Vector> phi;
    RunStatus status = RunStatus::Completed;
    std::string guard_message;

    std::size_t size() const { return times.size(); }
    const Parameter& back_param() const { return params.back(); }
};

enum class Metric { Risk, W, R, GradNormSq };

inline const std::vector<double>& metric_series(const Trajectory& traj, Metric metric) {
    switch (metric) {
        case Metric::Risk:
            return traj.risk;
        case Metric::W:
            return traj.w;
        case Metric::R:
            return traj.r;
        case Metric::GradNormSq:
            return traj.grad_norm_sq;
    }
    return traj.risk;
}

struct FlowConfig {
    double step = 1e-3;
    double horizon = 10.0;
    std::int64_t record_stride = 1;  // metrics recorded every k-th step
};

struct GdConfig {
    double eta = 0.01;
    std::int64_t epochs = 200;
    std::int64_t record_stride = 1;
};

namespace detail {

inline void record_point(Trajectory& traj, const RiskObjective& obj, const TargetModel& target,
                         double t, const Parameter& p, const Parameter& grad) {
    traj.times.push_back(t);
    traj.params.push_back(p);
    traj.risk.push_back(obj.risk(p));
    traj.w.push_back(dist2_to_trivial(p));
    traj.r.push_back(dist2_to_target(p, target.xi));
    traj.grad_norm_sq.push_back(grad.flat().squaredNorm());
    if (obj.linear_phi) traj.phi.push_back(effective_predictor(p));
}

inline void check_finite(const Vector& g) {
    if (!g.allFinite()) throw IntegrationError("gradient is not finite");
}

}  // namespace detail

/// Classical fixed-step RK4 on theta' = -grad(theta). Metrics are recorded
/// at the configured stride; a singularity or contraction guard inside the
/// gradient ends the run early with a partial trajectory and a flagged
/// status rather than an exception. Non-finite gradients do raise.
inline Trajectory flow_integrate(const RiskObjective& objective, const Parameter& theta0,
                                 const FlowConfig& config, const TargetModel& target) {
    if (!(config.step > 0.0) || !(config.horizon > 0.0))
        throw InputError("flow_integrate: step and horizon must be > 0");
    const std::int64_t n_steps = std::llround(config.horizon / config.step);
    const double h = config.step;

    Trajectory traj;
    Parameter p = theta0;
    try {
        Parameter g = objective.grad(p);
        detail::check_finite(g.flat());
        detail::record_point(traj, objective, target, 0.0, p, g);
        for (std::int64_t i = 0; i < n_steps; ++i) {
            const Vector y = p.flat();
            const Vector k1 = -g.flat();
            const Vector k2 = -objective.grad(Parameter::from_flat(y + 0.5 * h * k1)).flat();
            const Vector k3 = -objective.grad(Parameter::from_flat(y + 0.5 * h * k2)).flat();
            const Vector k4 = -objective.grad(Parameter::from_flat(y + h * k3)).flat();
            detail::check_finite(k2);
            detail::check_finite(k3);
            detail::check_finite(k4);
            p = Parameter::from_flat(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
            g = objective.grad(p);
            detail::check_finite(g.flat());
            if ((i + 1) % config.record_stride == 0 || i + 1 == n_steps)
                detail::record_point(traj, objective, target, (i + 1) * h, p, g);
        }
    } catch (const SingularityError& e) {
        traj.status = RunStatus::GuardTripped;
        traj.guard_message = e.what();
    } catch (const ContractionError& e) {
        traj.status = RunStatus::GuardTripped;
        traj.guard_message = e.what();
    }
    return traj;
}

/// Plain gradient descent theta <- theta - eta * grad(theta), with the same
/// recording and guard policy as the flow integrator.
inline Trajectory gd_run(const RiskObjective& objective, const Parameter& theta0,
                         const GdConfig& config, const TargetModel& target) {
    if (!(config.eta > 0.0)) throw InputError("gd_run: eta must be > 0");
    if (config.epochs < 0) throw InputError("gd_run: epochs must be >= 0");

    Trajectory traj;
    Parameter p = theta0;
    try {
        Parameter g = objective.grad(p);
        detail::check_finite(g.flat());
        detail::record_point(traj, objective, target, 0.0, p, g);
        for (std::int64_t t = 0; t < config.epochs; ++t) {
            p.theta1 -= config.eta * g.theta1;
            p.theta2 -= config.eta * g.theta2;
            g = objective.grad(p);
            detail::check_finite(g.flat());
            if ((t + 1) % config.record_stride == 0 || t + 1 == config.epochs)
                detail::record_point(traj, objective, target, static_cast<double>(t + 1), p, g);
        }
    } catch (const SingularityError& e) {
        traj.status = RunStatus::GuardTripped;
        traj.guard_message = e.what();
    } catch (const ContractionError& e) {
        traj.status = RunStatus::GuardTripped;
        traj.guard_message = e.what();
    }
    return traj;
}

/// Least-squares fit of the decay exponent: ln m(t) ~ ln m(0) - rate * t.
/// Every fitted value must be strictly positive.
inline double estimate_rate(const Trajectory& traj, Metric metric) {
    const std::vector<double>& m = metric_series(traj, metric);
    if (m.size() < 2) throw FitError("estimate_rate: need at least two points");
    double st = 0.0, sy = 0.0;
    const auto n = static_cast<double>(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!(m[i] > 0.0)) throw FitError("estimate_rate: nonpositive metric value");
        st += traj.times[i];
        sy += std::log(m[i]);
    }
    const double tbar = st / n, ybar = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double dt = traj.times[i] - tbar;
        sxx += dt * dt;
        sxy += dt * (std::log(m[i]) - ybar);
    }
    if (sxx == 0.0) throw FitError("estimate_rate: degenerate time axis");
    return -sxy / sxx;
}

enum class Direction { NonIncreasing, NonDecreasing };

struct MonotoneReport {
    bool ok = true;
    std::int64_t first_violation = -1;  // index of the later point of the offending pair
};

/// Monotonicity check with additive slack (default 1e-12).
inline MonotoneReport check_monotone(const Trajectory& traj, Metric metric, Direction direction,
                                     double slack = 1e-12) {
    const std::vector<double>& m = metric_series(traj, metric);
    for (std::size_t i = 1; i < m.size(); ++i) {
        const bool bad = direction == Direction::NonIncreasing ? m[i] > m[i - 1] + slack
                                                               : m[i] < m[i - 1] - slack;
        if (bad) return {false, static_cast<std::int64_t>(i)};
    }
    return {true, -1};
}

}  // namespace deq
