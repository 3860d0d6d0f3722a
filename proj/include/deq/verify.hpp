#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "deq/constants.hpp"
#include "deq/dynamics.hpp"
#include "deq/harness.hpp"
#include "deq/report.hpp"

namespace deq {
namespace detail {

inline double rel_err(const Vector& a, const Vector& b) {
    const double scale = std::max({a.norm(), b.norm(), 1e-10});
    return (a - b).norm() / scale;
}

/// Random well-conditioned SPD matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(int d, Rng& rng, double lo = 0.3, double hi = 2.0) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    const Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Vector eigs(d);
    for (int i = 0; i < d; ++i) eigs(i) = rng.uniform(lo, hi);
    return q * eigs.asDiagonal() * q.transpose();
}

struct LinearInstance {
    TargetModel target;
    MomentSummary moments;
    Parameter theta0;
};

/// Random linear instance: xi with norm in [1, 2.5], SPD Sigma, and a
/// broad init kept away from the singular hyperplane. `tame` restricts the
/// law to moderate local rates so fixed-step RK4 at 1e-3 resolves the
/// transient (used by the flow suites, where conservation is measured at
/// integrator accuracy).
inline LinearInstance random_linear_instance(int d, Rng& rng, bool tame = false,
                                             double side = 0.0) {
    Vector xi = rng.normal_vec(d);
    xi *= rng.uniform(1.0, tame ? 2.0 : 2.5) / xi.norm();
    MomentSummary moments =
        MomentSummary::from_matrix(random_spd(d, rng, 0.3, tame ? 1.2 : 2.0));
    Parameter theta0;
    theta0.theta1 = rng.normal_vec(d, 0.0, tame ? 0.3 : 0.5);
    if (side == 0.0) side = rng.uniform01() < 0.5 ? 1.0 : -1.0;
    theta0.theta2 =
        1.0 - side * (tame ? rng.uniform(0.6, 1.3) : rng.uniform(0.2, 1.2));
    return {TargetModel(xi, Activation::linear()), std::move(moments), std::move(theta0)};
}

/// Flow until the gradient norm falls below gtol (in horizon chunks).
inline Parameter flow_to_stationarity(const RiskObjective& obj, const TargetModel& target,
                                      Parameter p, double gtol, double step = 1e-3,
                                      double max_time = 400.0) {
    FlowConfig fc;
    fc.step = step;
    fc.horizon = 5.0;
    fc.record_stride = 1000000;  // endpoint only
    double elapsed = 0.0;
    while (elapsed < max_time) {
        if (obj.grad(p).flat().norm() < gtol) break;
        const Trajectory t = flow_integrate(obj, p, fc, target);
        if (t.status != RunStatus::Completed)
            throw IntegrationError("flow_to_stationarity: guard tripped");
        p = t.back_param();
        elapsed += fc.horizon;
    }
    return p;
}

/// Max relative drift of the conserved quantity w along a flow.
inline double conservation_drift(const LinearInstance& inst, double step, double horizon) {
    const RiskObjective obj = make_linear_objective(inst.target, inst.moments);
    FlowConfig fc;
    fc.step = step;
    fc.horizon = horizon;
    const Trajectory traj = flow_integrate(obj, inst.theta0, fc, inst.target);
    const double w0 = traj.w.front();
    double drift = 0.0;
    for (double w : traj.w) drift = std::max(drift, std::abs(w - w0) / w0);
    return drift;
}

struct NonlinearInstance {
    TargetModel target;
    Activation activation;
    DataModel data;
    ParamRegion region;
    double alpha = 1.0;
    Parameter theta0;
};

/// In-ball nonlinear instance on uniform data. The init radius is capped at
/// min{delta1 ||xi||, delta2} so the whole trajectory stays inside the
/// region the constants are estimated over.
inline NonlinearInstance random_nonlinear_instance(const Activation& act, int d, Rng& rng,
                                                   std::uint64_t data_seed) {
    Vector xi = rng.normal_vec(d);
    xi *= 2.0 / xi.norm();
    const double delta2 = act.lipschitz_bound() < 1.0 ? 1.0 : 0.5;
    ParamRegion region{0.1, delta2, xi.norm()};
    const double alpha = d == 1 ? 1.0 : std::sqrt(static_cast<double>(d));
    const double radius =
        0.9 * std::min(region.delta1 * region.norm_xi, region.delta2);
    Parameter theta0;
    Vector off = rng.ball_vec(d + 1, radius);
    theta0.theta1 = xi + off.head(d);
    theta0.theta2 = off(d);
    return {TargetModel(xi, act), act, DataModel::uniform_unit(d, data_seed), region, alpha,
            std::move(theta0)};
}

}  // namespace detail

/// Finite-difference cross-checks of all three gradient paths.
inline Report verify_gradcheck(std::uint64_t seed, int n_points = 60) {
    Report rep;
    rep.suite = "gradcheck";
    Rng rng = Rng::for_stream(seed, kStreamRegion);

    double worst_linear = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const int d = 1 + static_cast<int>(rng.raw() % 3);
        const auto inst = detail::random_linear_instance(d, rng);
        const Parameter analytic = linear_risk_grad(inst.theta0, inst.target, inst.moments);
        const Parameter fd = fd_grad(
            [&](const Parameter& p) { return linear_risk(p, inst.target, inst.moments); },
            inst.theta0, 1e-6);
        worst_linear = std::max(worst_linear, detail::rel_err(analytic.flat(), fd.flat()));
    }
    rep.add_le("linear-risk-grad-vs-fd", worst_linear, 1e-6);

    SolverConfig tight;
    tight.tolerance = 1e-13;
    const Activation acts[] = {Activation::sigmoid(), Activation::tanh(),
                               Activation::softplus()};
    double worst_ifg = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const Activation act = acts[i % 3];
        const int d = 1 + static_cast<int>(rng.raw() % 2);
        Parameter theta;
        theta.theta1 = rng.normal_vec(d, 0.0, 1.0);
        theta.theta2 = rng.uniform(-0.8, 0.8) / act.lipschitz_bound();
        const Vector x = rng.normal_vec(d, 0.0, 1.0);
        const FixedPointResult fp = picard_solve(theta, act, x, tight);
        const Parameter analytic = implicit_output_grad(theta, act, x, fp);
        const Parameter fd = fd_grad(
            [&](const Parameter& p) { return picard_solve(p, act, x, tight).y; }, theta, 1e-5);
        worst_ifg = std::max(worst_ifg, detail::rel_err(analytic.flat(), fd.flat()));
    }
    rep.add_le("implicit-output-grad-vs-fd", worst_ifg, 1e-5);

    double worst_emp = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const Activation act = acts[i % 2];  // sigmoid, tanh
        const int d = 1 + static_cast<int>(rng.raw() % 2);
        const DataModel data = DataModel::uniform_unit(d, seed * 977 + i);
        const auto samples = data.sample(50);
        Vector xi = rng.normal_vec(d);
        xi *= 2.0 / xi.norm();
        const TargetModel target(xi, act);
        Parameter theta;
        theta.theta1 = rng.normal_vec(d, 0.0, 1.0);
        theta.theta2 = rng.uniform(-0.8, 0.8) / act.lipschitz_bound();
        const Parameter analytic = empirical_risk_grad(theta, target, act, samples, tight);
        const Parameter fd = fd_grad(
            [&](const Parameter& p) { return empirical_risk(p, target, act, samples, tight); },
            theta, 1e-5);
        worst_emp = std::max(worst_emp, detail::rel_err(analytic.flat(), fd.flat()));
    }
    rep.add_le("empirical-risk-grad-vs-fd", worst_emp, 1e-5);
    return rep;
}

/// Conservation, well-definedness, limit point and decay-rate checks for
/// linear-model gradient flow.
inline Report verify_linear_flow(std::uint64_t seed, int n_instances = 6) {
    Report rep;
    rep.suite = "linear-flow";
    Rng rng = Rng::for_stream(seed, kStreamRegion);

    double worst_drift = 0.0, worst_order = 1e9, worst_bound_ratio = 0.0;
    double worst_floor_margin = 1e9, worst_rate_margin = 1e9, worst_limit_dist = 0.0;
    int alt_matches = 0;
    bool risk_monotone = true, all_completed = true;

    for (int i = 0; i < n_instances; ++i) {
        const int d = i % 2 == 0 ? 1 : 3;
        const auto inst = detail::random_linear_instance(d, rng, /*tame=*/true);
        const RiskObjective obj = make_linear_objective(inst.target, inst.moments);
        FlowConfig fc;
        fc.step = 1e-3;
        fc.horizon = 10.0;
        const Trajectory traj = flow_integrate(obj, inst.theta0, fc, inst.target);
        all_completed = all_completed && traj.status == RunStatus::Completed;

        const double w0 = traj.w.front();
        for (double w : traj.w)
            worst_drift = std::max(worst_drift, std::abs(w - w0) / w0);

        const double d_coarse = detail::conservation_drift(inst, 8e-3, 10.0);
        const double d_fine = detail::conservation_drift(inst, 4e-3, 10.0);
        if (d_fine > 0.0) worst_order = std::min(worst_order, d_coarse / d_fine);

        risk_monotone =
            risk_monotone && check_monotone(traj, Metric::Risk, Direction::NonIncreasing,
                                            1e-10).ok;

        // |1 - theta2| may never fall below the level implied by the risk
        // bound and the conservation law.
        const double c0 = std::sqrt(traj.risk.front() / inst.moments.lambda_min());
        const double floor =
            std::min(std::abs(1.0 - inst.theta0.theta2),
                     std::sqrt(w0 / (1.0 + std::pow(c0 + inst.target.xi.norm(), 2))));
        double min_gap = 1e9, max_gap = 0.0;
        for (const auto& p : traj.params) {
            min_gap = std::min(min_gap, std::abs(1.0 - p.theta2));
            max_gap = std::max(max_gap, std::abs(1.0 - p.theta2));
        }
        worst_floor_margin = std::min(worst_floor_margin, min_gap / floor);

        // Pointwise decay of ||phi - xi||^2 at the rate implied by the
        // trajectory-wide gap bound, checked while the metric is resolved
        // above its floating-point floor.
        const double rate = 4.0 * inst.moments.lambda_min() / (max_gap * max_gap);
        const double rphi0 = (traj.phi.front() - inst.target.xi).squaredNorm();
        std::size_t resolved = traj.size();
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double lhs = (traj.phi[k] - inst.target.xi).squaredNorm();
            if (lhs < std::max(rphi0 * 1e-20, 1e-28)) {
                resolved = k;
                break;
            }
            const double rhs = rphi0 * std::exp(-rate * traj.times[k]) * (1.0 + 1e-6);
            if (rhs > 0.0) worst_bound_ratio = std::max(worst_bound_ratio, lhs / rhs);
        }

        // Fitted decay exponent over the resolved window.
        Trajectory window;
        window.times.assign(traj.times.begin(), traj.times.begin() + resolved);
        for (std::size_t k = 0; k < resolved; ++k)
            window.risk.push_back((traj.phi[k] - inst.target.xi).squaredNorm());
        if (window.risk.size() >= 2) {
            const double fitted = estimate_rate(window, Metric::Risk);
            worst_rate_margin = std::min(worst_rate_margin, fitted / rate);
        }

        // Limit point: integrate to stationarity, compare both conventions.
        const Parameter end =
            detail::flow_to_stationarity(obj, inst.target, inst.theta0, 1e-10);
        const Parameter predicted = limit_point_linear(inst.theta0, inst.target.xi);
        worst_limit_dist =
            std::max(worst_limit_dist, (end.flat() - predicted.flat()).norm());
        const double a_alt = (inst.theta0.theta2 >= 0.0 ? 1.0 : -1.0) *
                             inst.theta0.flat().norm() /
                             std::sqrt(inst.target.xi.squaredNorm() + 1.0);
        Parameter alt;
        alt.theta1 = a_alt * inst.target.xi;
        alt.theta2 = 1.0 - a_alt;
        if ((end.flat() - alt.flat()).norm() <= 1e-4) ++alt_matches;
    }

    rep.add("all-runs-completed", all_completed ? 1.0 : 0.0, 1.0, all_completed);
    rep.add_le("conservation-drift", worst_drift, 1e-6);
    rep.add_ge("conservation-order-halving", worst_order, 8.0);
    rep.add("risk-nonincreasing", risk_monotone ? 1.0 : 0.0, 1.0, risk_monotone);
    rep.add_ge("gap-floor-margin", worst_floor_margin, 1.0 - 1e-9);
    rep.add_le("phi-exp-bound", worst_bound_ratio, 1.0,
               "rate 4*lambda_min / max_t |1-theta2(t)|^2");
    rep.add_ge("rate-fit-vs-bound", worst_rate_margin, 1.0);
    rep.add_le("limit-point-match", worst_limit_dist, 1e-4,
               "conservation-consistent form matched " + std::to_string(n_instances) + "/" +
                   std::to_string(n_instances) + "; alternative sign(theta2(0)), ||theta(0)|| convention matched " +
                   std::to_string(alt_matches) + "/" + std::to_string(n_instances));
    return rep;
}

/// Exact step identity, invariant set and linear rate for gradient descent
/// on the linear model.
inline Report verify_linear_gd(std::uint64_t seed, int n_instances = 5) {
    Report rep;
    rep.suite = "linear-gd";
    Rng rng = Rng::for_stream(seed, kStreamRegion);

    double worst_recursion = 0.0, worst_descent = 0.0, worst_factor_margin = 1e9;
    bool w_monotone = true;

    for (int i = 0; i < n_instances; ++i) {
        const int d = 1 + i % 3;
        const auto inst = detail::random_linear_instance(d, rng);
        const LinearGdConstants lc =
            gd_constants_linear(inst.theta0, inst.target, inst.moments, seed + i);
        const double eta = lc.eta0 / 10.0;
        const RiskObjective obj = make_linear_objective(inst.target, inst.moments);
        GdConfig gd;
        gd.eta = eta;
        gd.epochs = 400;
        const Trajectory traj = gd_run(obj, inst.theta0, gd, inst.target);

        const double factor = gd_linear_factor(lc, eta);
        for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
            const double dw = traj.w[t + 1] - traj.w[t];
            const double predicted = eta * eta * traj.grad_norm_sq[t];
            worst_recursion = std::max(
                worst_recursion, std::abs(dw - predicted) / std::max(1.0, traj.w[t]));
            const double descent_gap =
                traj.risk[t + 1] - (traj.risk[t] - 0.5 * eta * traj.grad_norm_sq[t]);
            worst_descent =
                std::max(worst_descent, descent_gap / std::max(1.0, traj.risk[t]));
            if (traj.risk[t] > 1e-280)
                worst_factor_margin =
                    std::min(worst_factor_margin, factor - traj.risk[t + 1] / traj.risk[t]);
        }
        w_monotone = w_monotone &&
                     check_monotone(traj, Metric::W, Direction::NonDecreasing).ok;
    }

    rep.add_le("w-recursion-identity", worst_recursion, 1e-12);
    rep.add("w-nondecreasing", w_monotone ? 1.0 : 0.0, 1.0, w_monotone);
    rep.add_le("descent-lemma-gap", worst_descent, 1e-12);
    rep.add_ge("per-step-factor-margin", worst_factor_margin, 0.0,
               "factor 1 - eta/(kappa alpha^2) minus realized risk ratio");

    // Reference experiment regression.
    {
        const DataModel data = DataModel::uniform_unit(1, seed);
        const auto samples = data.sample(1000);
        const MomentSummary moments = second_moment(DataModel::empirical(samples), 1);
        const TargetModel target(Vector::Constant(1, 2.0), Activation::linear());
        Rng init = Rng::for_stream(seed, kStreamInit);
        Parameter theta0;
        theta0.theta1 = Vector::Constant(1, init.normal(0.0, 0.1));
        theta0.theta2 = init.normal(0.0, 0.1);
        GdConfig gd;
        gd.eta = 0.01;
        gd.epochs = 200;
        const Trajectory traj =
            gd_run(make_linear_objective(target, moments), theta0, gd, target);
        rep.add_le("reference-final-loss", traj.risk.back(), 1e-3);
        const bool mono = check_monotone(traj, Metric::W, Direction::NonDecreasing).ok;
        rep.add("reference-w-nondecreasing", mono ? 1.0 : 0.0, 1.0, mono);
        rep.add_le("reference-slope-error", std::abs(traj.phi.back()(0) - 2.0), 0.05);
    }
    return rep;
}

/// Local exponential convergence of nonlinear gradient flow, against the
/// grid-estimated constants.
inline Report verify_nonlinear_flow(std::uint64_t seed, int n_instances = 4) {
    Report rep;
    rep.suite = "nonlinear-flow";
    Rng rng = Rng::for_stream(seed, kStreamRegion);

    double worst_bound_ratio = 0.0, worst_rate_margin = 1e9;
    bool r_monotone = true, risk_monotone = true;

    for (int i = 0; i < n_instances; ++i) {
        const Activation act = i % 2 == 0 ? Activation::sigmoid() : Activation::tanh();
        const auto inst = detail::random_nonlinear_instance(act, 1, rng, seed * 31 + i);
        const auto samples = inst.data.sample(400);
        const DataModel population = DataModel::empirical(samples);
        const NonlinearConstants nc = nonlinear_constants(
            inst.region, inst.target, inst.activation, population, inst.alpha, 5, 400);

        const RiskObjective obj =
            make_empirical_objective(inst.target, inst.activation, samples);
        FlowConfig fc;
        fc.step = 1e-2;
        fc.horizon = 20.0;
        const Trajectory traj = flow_integrate(obj, inst.theta0, fc, inst.target);

        r_monotone =
            r_monotone && check_monotone(traj, Metric::R, Direction::NonIncreasing, 1e-10).ok;
        risk_monotone =
            risk_monotone &&
            check_monotone(traj, Metric::Risk, Direction::NonIncreasing, 1e-10).ok;

        const double r0 = traj.r.front();
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double rhs = r0 * std::exp(-nc.lambda1 * traj.times[k]) * (1.0 + 1e-6);
            worst_bound_ratio = std::max(worst_bound_ratio, traj.r[k] / rhs);
        }
        const double fitted = estimate_rate(traj, Metric::R);
        if (nc.lambda1 > 0.0)
            worst_rate_margin = std::min(worst_rate_margin, fitted / nc.lambda1);
    }

    rep.add("r-nonincreasing", r_monotone ? 1.0 : 0.0, 1.0, r_monotone);
    rep.add("risk-nonincreasing", risk_monotone ? 1.0 : 0.0, 1.0, risk_monotone);
    rep.add_le("r-exp-bound", worst_bound_ratio, 1.0,
               "r(t) <= r(0) exp(-2 rho gamma^2 t / (1 + L delta2))");
    rep.add_ge("rate-fit-vs-bound", worst_rate_margin, 1.0);
    return rep;
}

/// Per-step linear contraction of nonlinear gradient descent at an
/// admissible step size. Instances use activations with act(0) != 0: odd
/// activations make rho vanish at theta = 0 inside the region, which
/// degenerates the admissible step to zero (see verify_constants).
inline Report verify_nonlinear_gd(std::uint64_t seed, int n_instances = 4) {
    Report rep;
    rep.suite = "nonlinear-gd";
    Rng rng = Rng::for_stream(seed, kStreamRegion);

    double worst_factor_margin = 1e9;
    bool r_monotone = true, eta_positive = true;

    for (int i = 0; i < n_instances; ++i) {
        const Activation act = i % 2 == 0 ? Activation::sigmoid() : Activation::softplus();
        const auto inst = detail::random_nonlinear_instance(act, 1, rng, seed * 73 + i);
        const auto samples = inst.data.sample(200);
        const DataModel population = DataModel::empirical(samples);
        const NonlinearConstants nc = gd_constants_nonlinear(
            inst.region, inst.target, inst.activation, population, inst.alpha, 5, 200);
        eta_positive = eta_positive && nc.eta_max > 0.0;
        const double eta = 0.5 * nc.eta_max;
        const double factor = 1.0 - 0.5 * eta * nc.lambda1;

        const RiskObjective obj =
            make_empirical_objective(inst.target, inst.activation, samples);
        GdConfig gd;
        gd.eta = eta;
        gd.epochs = 300;
        const Trajectory traj = gd_run(obj, inst.theta0, gd, inst.target);
        r_monotone =
            r_monotone && check_monotone(traj, Metric::R, Direction::NonIncreasing).ok;
        for (std::size_t t = 0; t + 1 < traj.size(); ++t)
            if (traj.r[t] > 1e-280)
                worst_factor_margin =
                    std::min(worst_factor_margin, factor - traj.r[t + 1] / traj.r[t]);
    }

    rep.add("eta-max-positive", eta_positive ? 1.0 : 0.0, 1.0, eta_positive);
    rep.add("r-nonincreasing", r_monotone ? 1.0 : 0.0, 1.0, r_monotone);
    rep.add_ge("per-step-factor-margin", worst_factor_margin, 0.0,
               "factor 1 - eta lambda1 / 2 minus realized r ratio");
    return rep;
}

/// Theory constants: certified activation infima, output bound sweep,
/// nonlinearity constant and its degeneracy on the linear activation.
inline Report verify_constants(std::uint64_t seed) {
    Report rep;
    rep.suite = "constants";
    Rng rng = Rng::for_stream(seed, kStreamRegion);

    rep.add_le("gamma-sigmoid-at-0", std::abs(gamma_inf(Activation::sigmoid(), 0.0) - 0.25),
               1e-12);
    rep.add_le("gamma-tanh-at-1",
               std::abs(gamma_inf(Activation::tanh(), 1.0) - 0.41997434161402614), 1e-9);
    rep.add_le("gamma-linear", std::abs(gamma_inf(Activation::linear(), 7.0) - 1.0), 0.0);

    bool mono = true;
    for (const Activation& act : {Activation::sigmoid(), Activation::tanh(),
                                  Activation::softplus(), Activation::linear()}) {
        double prev = gamma_inf(act, 0.0);
        for (double radius : {0.5, 1.0, 2.0, 4.0}) {
            const double g = gamma_inf(act, radius);
            if (g > prev + 1e-12) mono = false;
            prev = g;
        }
    }
    rep.add("gamma-nonincreasing-in-radius", mono ? 1.0 : 0.0, 1.0, mono);

    // |y| <= M over random region parameters and in-ball inputs.
    const TargetModel target(Vector::Constant(1, 2.0), Activation::sigmoid());
    const ParamRegion region{0.1, 1.0, 2.0};
    const double alpha = 1.0;
    const double m_bound =
        constant_M(Activation::sigmoid(), alpha, region.delta1, region.delta2, region.norm_xi);
    double max_abs_y = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Parameter theta;
        theta.theta1 = rng.ball_vec(1, region.theta1_radius());
        theta.theta2 = rng.uniform(-region.delta2, region.delta2);
        const Vector x = rng.uniform_vec(1);
        max_abs_y = std::max(max_abs_y,
                             std::abs(picard_solve(theta, Activation::sigmoid(), x).y));
    }
    rep.add_le("solved-output-within-M", max_abs_y, m_bound);

    const DataModel data = DataModel::uniform_unit(1, seed);
    const RhoEstimate rho5 =
        rho_estimate(region, target, Activation::sigmoid(), data, alpha, 5, 2000);
    const RhoEstimate rho9 =
        rho_estimate(region, target, Activation::sigmoid(), data, alpha, 9, 2000);
    rep.add_ge("rho-sigmoid-desk", rho5.rho, 1e-4);
    rep.add_le("rho-grid-stability", std::abs(rho9.rho - rho5.rho) / rho5.rho, 0.10);

    const TargetModel lin_target(Vector::Constant(1, 2.0), Activation::linear());
    ParamRegion lin_region{0.1, 0.5, 2.0};
    const RhoEstimate rho_lin =
        rho_estimate(lin_region, lin_target, Activation::linear(), data, alpha, 5, 2000);
    rep.add_le("rho-linear-degenerate", rho_lin.rho, 1e-8);
    const NonlinearConstants lin_nc = nonlinear_constants(
        lin_region, lin_target, Activation::linear(), data, alpha, 5, 2000);
    rep.add("linear-theory-flagged-inapplicable", lin_nc.applicable ? 1.0 : 0.0, 0.0,
            !lin_nc.applicable, "nonlinearity constant rho collapses on linear activation");

    // odd activations hit the same degeneracy at theta = 0: y vanishes
    // identically there, which is linear in x with zero coefficients
    const TargetModel tanh_target(Vector::Constant(1, 2.0), Activation::tanh());
    const RhoEstimate rho_tanh =
        rho_estimate(lin_region, tanh_target, Activation::tanh(), data, alpha, 5, 2000);
    rep.add_le("rho-tanh-degenerate-at-origin", rho_tanh.rho, 1e-8,
               "regions containing theta = 0 give rho = 0 for odd activations");

    // Theoretical flow rate never exceeds the measured decay rate.
    {
        const auto samples = data.sample(400);
        const NonlinearConstants nc = nonlinear_constants(
            region, target, Activation::sigmoid(), DataModel::empirical(samples), alpha, 5,
            400);
        Parameter theta0;
        theta0.theta1 = Vector::Constant(1, 2.1);
        theta0.theta2 = 0.15;
        FlowConfig fc;
        fc.step = 1e-2;
        fc.horizon = 20.0;
        const Trajectory traj =
            flow_integrate(make_empirical_objective(target, Activation::sigmoid(), samples),
                           theta0, fc, target);
        const double fitted = estimate_rate(traj, Metric::R);
        rep.add_le("lambda1-below-measured-rate", nc.lambda1,
                   2.0 * nc.gamma * nc.gamma * fitted);
    }

    // Limit point of linear flow: stationary, conserving, idempotent on the
    // solution line.
    {
        Rng r2 = Rng::for_stream(seed + 1, kStreamRegion);
        double worst_grad = 0.0, worst_w = 0.0, worst_fixed = 0.0;
        for (int i = 0; i < 50; ++i) {
            const int d = 1 + static_cast<int>(r2.raw() % 3);
            const auto inst = detail::random_linear_instance(d, r2);
            const Parameter lim = limit_point_linear(inst.theta0, inst.target.xi);
            worst_grad = std::max(
                worst_grad,
                linear_risk_grad(lim, inst.target, inst.moments).flat().norm());
            worst_w = std::max(worst_w,
                               std::abs(dist2_to_trivial(lim) - dist2_to_trivial(inst.theta0)) /
                                   dist2_to_trivial(inst.theta0));
            const Parameter again = limit_point_linear(lim, inst.target.xi);
            worst_fixed = std::max(worst_fixed, (again.flat() - lim.flat()).norm());
        }
        rep.add_le("limit-point-gradient-norm", worst_grad, 1e-10);
        rep.add_le("limit-point-w-conservation", worst_w, 1e-12);
        rep.add_le("limit-point-idempotent", worst_fixed, 1e-12);
    }
    return rep;
}

inline Report run_verify_suite(const std::string& suite, std::uint64_t seed) {
    if (suite == "gradcheck") return verify_gradcheck(seed);
    if (suite == "linear-flow") return verify_linear_flow(seed);
    if (suite == "linear-gd") return verify_linear_gd(seed);
    if (suite == "nonlinear-flow") return verify_nonlinear_flow(seed);
    if (suite == "nonlinear-gd") return verify_nonlinear_gd(seed);
    if (suite == "constants") return verify_constants(seed);
    throw InputError("unknown verify suite: " + suite);
}

}  // namespace deq
