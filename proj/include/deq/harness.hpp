#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "deq/constants.hpp"
#include "deq/csv.hpp"
#include "deq/dynamics.hpp"
#include "deq/report.hpp"
#include "deq/svg.hpp"

namespace deq {

/// Full description of one training run. Defaults correspond to the
/// reference linear experiment (xi = 2, 1000 uniform samples, eta = 0.01,
/// 200 epochs).
struct RunConfig {
    std::string experiment = "custom";  // linear-1d | sigmoid-1d | custom
    std::uint64_t seed = 42;
    int dim = 1;
    Vector xi = Vector::Constant(1, 2.0);
    Activation model_activation = Activation::linear();
    Activation target_activation = Activation::linear();
    DataModel data = DataModel::uniform_unit(1, 42);
    std::int64_t n_samples = 1000;
    double eta = 0.01;
    std::int64_t epochs = 200;
    bool flow_mode = false;
    double flow_step = 1e-3;
    double horizon = 10.0;
    std::int64_t record_stride = 1;
    SolverMethod solver = SolverMethod::Picard;
    double tol = 1e-12;

    Json to_json() const {
        Json xs = Json::array();
        for (Eigen::Index i = 0; i < xi.size(); ++i) xs.push_back(xi(i));
        Json j{{"experiment", experiment},
               {"seed", seed},
               {"dim", dim},
               {"xi", xs},
               {"model_activation", model_activation.name()},
               {"target_activation", target_activation.name()},
               {"data", data.name()},
               {"n_samples", n_samples},
               {"mode", flow_mode ? "flow" : "gd"},
               {"solver", solver == SolverMethod::Brent ? "brent" : "picard"},
               {"tol", tol}};
        if (flow_mode) {
            j["step"] = flow_step;
            j["horizon"] = horizon;
        } else {
            j["eta"] = eta;
            j["epochs"] = epochs;
        }
        return j;
    }
};

/// Initialization law of the experiments: theta(0) ~ N(mean, 0.1^2 I_{d+1}),
/// drawn from the init stream of the run seed.
inline Parameter draw_init(const RunConfig& config, const Vector& mean_theta1,
                           double mean_theta2) {
    Rng rng = Rng::for_stream(config.seed, kStreamInit);
    Parameter p;
    p.theta1 = Vector(config.dim);
    for (int i = 0; i < config.dim; ++i) p.theta1(i) = rng.normal(mean_theta1(i), 0.1);
    p.theta2 = rng.normal(mean_theta2, 0.1);
    return p;
}

struct RunResult {
    Trajectory trajectory;
    Report assertions;
    Json summary;
    bool pass = false;
};

/// Write the standard artifact set: trajectory.csv plus SVG views of risk,
/// the parameter-plane path, and both squared distances, then summary.json.
/// The CSV carries every plotted number; the SVGs are derived views.
inline void write_run_artifacts(const Trajectory& traj, const RunConfig& config,
                                const Json& constants, const Report& assertions,
                                const std::string& outdir, Json* summary_out = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    const std::string csv_name = "trajectory.csv";
    write_trajectory_csv(traj, config.dim, (fs::path(outdir) / csv_name).string());

    const char* tlabel = config.flow_mode ? "t" : "epoch";
    {
        SvgPlot plot("loss", tlabel, "risk", /*log_y=*/true);
        plot.set_source(csv_name + " columns t,risk");
        plot.add_series(traj.times, traj.risk, "#1f77b4");
        plot.write((fs::path(outdir) / "loss.svg").string());
    }
    {
        std::vector<double> t1, t2;
        for (const auto& p : traj.params) {
            t1.push_back(p.theta1(0));
            t2.push_back(p.theta2);
        }
        SvgPlot plot("parameter trajectory", "theta_1", "theta_2");
        plot.set_source(csv_name + " columns theta_1,theta_" + std::to_string(config.dim + 1));
        plot.add_series(t1, t2, "#1f77b4");
        plot.add_marker(0.0, 1.0, "#d62728");            // trivial solution
        plot.add_marker(config.xi(0), 0.0, "#2ca02c");   // target parameter
        plot.write((fs::path(outdir) / "trajectory-plane.svg").string());
    }
    {
        SvgPlot plot("squared distance to (0, 1)", tlabel, "w");
        plot.set_source(csv_name + " columns t,w");
        plot.add_series(traj.times, traj.w, "#1f77b4");
        plot.write((fs::path(outdir) / "distance-to-(0,1).svg").string());
    }
    {
        SvgPlot plot("squared distance to (xi, 0)", tlabel, "r", /*log_y=*/true);
        plot.set_source(csv_name + " columns t,r");
        plot.add_series(traj.times, traj.r, "#1f77b4");
        plot.write((fs::path(outdir) / "distance-to-target.svg").string());
    }

    Json summary{{"config", config.to_json()},
                 {"constants", constants},
                 {"assertions", assertions.to_json()["checks"]},
                 {"status", (assertions.all_pass() && traj.status == RunStatus::Completed)
                                ? "pass"
                                : "fail"}};
    if (traj.status != RunStatus::Completed) summary["guard"] = traj.guard_message;
    write_json(summary, (fs::path(outdir) / "summary.json").string());
    if (summary_out) *summary_out = summary;
}

/// Reference linear experiment: fit f(x) = 2x with the implicit linear
/// model by gradient descent (eta = 0.01, 200 epochs) on 1000 uniform
/// samples. `near_trivial` moves the init law to N((0,1), 0.1^2 I).
inline RunResult reproduce_linear(std::uint64_t seed, const std::string& outdir,
                                  bool near_trivial = false) {
    RunConfig config;
    config.experiment = "linear-1d";
    config.seed = seed;
    config.data = DataModel::uniform_unit(1, seed);

    const auto samples = config.data.sample(config.n_samples);
    const MomentSummary moments = second_moment(DataModel::empirical(samples), 1);
    const TargetModel target(config.xi, Activation::linear());
    const Parameter theta0 =
        draw_init(config, Vector::Zero(1), near_trivial ? 1.0 : 0.0);

    const RiskObjective objective = make_linear_objective(target, moments);
    GdConfig gd;
    gd.eta = config.eta;
    gd.epochs = config.epochs;
    RunResult out;
    out.trajectory = gd_run(objective, theta0, gd, target);

    const LinearGdConstants lc = gd_constants_linear(theta0, target, moments, seed);
    const Parameter limit = limit_point_linear(theta0, config.xi);
    Json constants{{"kappa", lc.kappa},
                   {"c0", lc.c0},
                   {"beta_lemma", lc.beta_lemma},
                   {"eta0", lc.eta0},
                   {"gd_linear_factor", gd_linear_factor(lc, config.eta)},
                   {"limit_point", Json::array({limit.theta1(0), limit.theta2})},
                   {"w0", lc.w0},
                   {"risk0", lc.risk0}};

    out.assertions.suite = "linear-1d";
    const Trajectory& traj = out.trajectory;
    out.assertions.add_le("final-loss", traj.risk.back(), 1e-3);
    const auto mono = check_monotone(traj, Metric::W, Direction::NonDecreasing);
    out.assertions.add("w-nondecreasing", mono.ok ? 1.0 : 0.0, 1.0, mono.ok);
    const double slope = traj.phi.back()(0);
    out.assertions.add_le("slope-error", std::abs(slope - 2.0), 0.05);

    write_run_artifacts(traj, config, constants, out.assertions, outdir, &out.summary);
    out.pass = out.assertions.all_pass() && traj.status == RunStatus::Completed;
    return out;
}

/// Reference single-index experiment: fit f(x) = sigmoid(2x) with a single
/// implicit sigmoid neuron by gradient descent (eta = 0.1, 4000 epochs,
/// Brent forward pass) on 1000 uniform samples.
inline RunResult reproduce_sigmoid(std::uint64_t seed, const std::string& outdir) {
    RunConfig config;
    config.experiment = "sigmoid-1d";
    config.seed = seed;
    config.model_activation = Activation::sigmoid();
    config.target_activation = Activation::sigmoid();
    config.eta = 0.1;
    config.epochs = 4000;
    config.solver = SolverMethod::Brent;
    config.data = DataModel::uniform_unit(1, seed);

    auto samples = config.data.sample(config.n_samples);
    const TargetModel target(config.xi, config.target_activation);
    const Parameter theta0 = draw_init(config, Vector::Zero(1), 0.0);

    SolverConfig solver;
    solver.tolerance = config.tol;
    solver.method = config.solver;
    const RiskObjective objective =
        make_empirical_objective(target, config.model_activation, samples, solver);
    GdConfig gd;
    gd.eta = config.eta;
    gd.epochs = config.epochs;
    RunResult out;
    out.trajectory = gd_run(objective, theta0, gd, target);

    // Local-convergence constants over the desk region, with the run's own
    // sample set as the population.
    ParamRegion region{0.1, 1.0, config.xi.norm()};
    const NonlinearConstants nc =
        nonlinear_constants(region, target, config.model_activation,
                            DataModel::empirical(samples), /*alpha=*/1.0,
                            /*grid_n=*/5, /*n_mc=*/config.n_samples);
    Json constants{{"M", nc.M},
                   {"gamma", nc.gamma},
                   {"rho", nc.rho.rho},
                   {"rho_standard_error", nc.rho.standard_error},
                   {"rho_grid_n", nc.rho.grid_n},
                   {"rho_n_mc", nc.rho.n_mc},
                   {"lambda1", nc.lambda1},
                   {"lambda2", nc.lambda2},
                   {"eta_max", nc.eta_max},
                   {"applicable", nc.applicable}};

    out.assertions.suite = "sigmoid-1d";
    const Trajectory& traj = out.trajectory;
    const double final_dist = std::sqrt(traj.r.back());
    out.assertions.add_le("final-distance-to-target", final_dist, 0.1);

    // Monotone decrease of the distance once the iterates enter the ball of
    // the local theory, radius min{(1+delta1)||xi||, delta2}.
    const double ball = std::min((1.0 + region.delta1) * region.norm_xi, region.delta2);
    std::size_t entry = traj.size();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (std::sqrt(traj.r[i]) <= ball) {
            entry = i;
            break;
        }
    }
    bool mono_ok = entry < traj.size();
    std::int64_t viol = -1;
    for (std::size_t i = entry + 1; i < traj.size() && mono_ok; ++i) {
        if (traj.r[i] > traj.r[i - 1] + 1e-8) {
            mono_ok = false;
            viol = static_cast<std::int64_t>(i);
        }
    }
    out.assertions.add("in-ball-distance-monotone", mono_ok ? 1.0 : 0.0, 1.0, mono_ok,
                       mono_ok ? "entered ball at epoch " + std::to_string(entry)
                               : "violation at epoch " + std::to_string(viol));

    write_run_artifacts(traj, config, constants, out.assertions, outdir, &out.summary);
    out.pass = out.assertions.all_pass() && traj.status == RunStatus::Completed;
    return out;
}

/// Generic flow / gd run driven by a RunConfig, writing the standard
/// artifact set.
inline RunResult run_custom(const RunConfig& config, const std::string& outdir) {
    const TargetModel target(config.xi, config.target_activation);
    const Parameter theta0 = draw_init(config, Vector::Zero(config.dim), 0.0);

    RiskObjective objective;
    Json constants = Json::object();
    std::vector<Vector> samples = config.data.sample(config.n_samples);
    if (config.model_activation.kind() == ActivationKind::Linear) {
        const MomentSummary moments = second_moment(DataModel::empirical(samples), 1);
        objective = make_linear_objective(target, moments);
        const LinearGdConstants lc = gd_constants_linear(theta0, target, moments, config.seed);
        const Parameter limit = limit_point_linear(theta0, config.xi);
        Json lp = Json::array();
        const Vector lf = limit.flat();
        for (Eigen::Index i = 0; i < lf.size(); ++i) lp.push_back(lf(i));
        constants = Json{{"kappa", lc.kappa},      {"c0", lc.c0},
                         {"beta_lemma", lc.beta_lemma}, {"eta0", lc.eta0},
                         {"limit_point", lp},      {"w0", lc.w0},
                         {"risk0", lc.risk0}};
    } else {
        SolverConfig solver;
        solver.tolerance = config.tol;
        solver.method = config.solver;
        objective = make_empirical_objective(target, config.model_activation, samples, solver);
    }

    RunResult out;
    out.assertions.suite = config.experiment;
    if (config.flow_mode) {
        FlowConfig fc;
        fc.step = config.flow_step;
        fc.horizon = config.horizon;
        fc.record_stride = config.record_stride;
        out.trajectory = flow_integrate(objective, theta0, fc, target);
        const auto mono = check_monotone(out.trajectory, Metric::Risk, Direction::NonIncreasing,
                                         1e-10);
        out.assertions.add("risk-nonincreasing", mono.ok ? 1.0 : 0.0, 1.0, mono.ok);
    } else {
        GdConfig gd;
        gd.eta = config.eta;
        gd.epochs = config.epochs;
        gd.record_stride = config.record_stride;
        out.trajectory = gd_run(objective, theta0, gd, target);
    }
    const bool completed = out.trajectory.status == RunStatus::Completed;
    out.assertions.add("run-completed", completed ? 1.0 : 0.0, 1.0, completed,
                       out.trajectory.guard_message);
    write_run_artifacts(out.trajectory, config, constants, out.assertions, outdir,
                        &out.summary);
    out.pass = out.assertions.all_pass();
    return out;
}

}  // namespace deq
