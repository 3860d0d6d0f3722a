#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deq/harness.hpp"
#include "deq/verify.hpp"

namespace {

deq::Vector parse_xi(const std::string& text, int dim) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (!vals.empty() && dim > 0 && static_cast<int>(vals.size()) != dim)
        throw deq::InputError("--xi has " + std::to_string(vals.size()) +
                              " components but --dim is " + std::to_string(dim));
    deq::Vector xi(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) xi(i) = vals[i];
    return xi;
}

deq::DataModel parse_data(const std::string& text, int dim, std::uint64_t seed) {
    if (text == "uniform") return deq::DataModel::uniform_unit(dim, seed);
    if (text.rfind("gaussian", 0) == 0) {
        double s = 1.0;
        const auto colon = text.find(':');
        if (colon != std::string::npos) s = std::stod(text.substr(colon + 1));
        return deq::DataModel::gaussian_iso(dim, s, seed);
    }
    if (text.rfind("file:", 0) == 0) {
        std::ifstream in(text.substr(5));
        if (!in) throw deq::InputError("cannot read sample file " + text.substr(5));
        std::vector<deq::Vector> samples;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<double> vals;
            std::stringstream ss(line);
            std::string tok;
            while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
            deq::Vector x(vals.size());
            for (std::size_t i = 0; i < vals.size(); ++i) x(i) = vals[i];
            samples.push_back(std::move(x));
        }
        return deq::DataModel::empirical(std::move(samples));
    }
    throw deq::InputError("unknown data spec: " + text +
                          " (expected uniform | gaussian[:s] | file:<path>)");
}

int report_and_exit(const deq::Report& rep, const std::string& outdir) {
    if (!outdir.empty()) {
        std::filesystem::create_directories(outdir);
        deq::write_json(rep.to_json(),
                        (std::filesystem::path(outdir) / (rep.suite + "-report.json")).string());
    }
    for (const auto& c : rep.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << rep.suite << "/" << c.name
                  << "  value=" << c.value << " bound=" << c.bound
                  << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
    std::cout << rep.suite << ": " << (rep.all_pass() ? "pass" : "fail") << "\n";
    return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for implicit (deep equilibrium) linear and "
                 "single-index models: training runs, theorem constants, and "
                 "verification suites"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    std::string outdir = "out";
    std::string xi_text, data_text = "uniform", activation_text = "sigmoid";
    std::string solver_text = "picard";
    int dim = 1;
    double eta = 0.01, tol = 1e-12, step = 1e-3, horizon = 10.0;
    std::int64_t epochs = 200, n_samples = 1000, stride = 1;
    bool near_trivial = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "run seed");
        cmd->add_option("--out", outdir, "output directory");
    };

    auto* rl = app.add_subcommand("reproduce-linear",
                                  "reference linear experiment (xi=2, eta=0.01, 200 epochs)");
    add_common(rl);
    rl->add_flag("--init-near-trivial", near_trivial,
                 "initialize near the trivial solution (0, 1)");

    auto* rs = app.add_subcommand("reproduce-sigmoid",
                                  "reference single-index experiment (eta=0.1, 4000 epochs, "
                                  "Brent forward pass)");
    add_common(rs);

    auto add_model_flags = [&](CLI::App* cmd) {
        add_common(cmd);
        cmd->add_option("--dim", dim, "input dimension");
        cmd->add_option("--xi", xi_text, "target index, comma separated");
        cmd->add_option("--activation", activation_text,
                        "linear | sigmoid | tanh | softplus");
        cmd->add_option("--data", data_text, "uniform | gaussian[:s] | file:<path>");
        cmd->add_option("--samples", n_samples, "sample count for empirical objectives");
        cmd->add_option("--solver", solver_text, "picard | brent");
        cmd->add_option("--tol", tol, "equilibrium solver tolerance");
        cmd->add_option("--stride", stride, "record every k-th step");
    };

    auto* flow = app.add_subcommand("flow", "integrate gradient flow (fixed-step RK4)");
    add_model_flags(flow);
    flow->add_option("--step", step, "RK4 step size");
    flow->add_option("--horizon", horizon, "integration horizon T");

    auto* gd = app.add_subcommand("gd", "run gradient descent");
    add_model_flags(gd);
    gd->add_option("--eta", eta, "step size");
    gd->add_option("--epochs", epochs, "number of steps");

    std::string suite = "gradcheck";
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite,
                       "linear-flow | linear-gd | nonlinear-flow | nonlinear-gd | gradcheck | "
                       "constants")
        ->required();
    add_common(verify);

    auto* constants = app.add_subcommand("constants",
                                         "compute theorem constants for one configuration");
    add_model_flags(constants);
    double delta1 = 0.1, delta2 = 1.0, alpha = 1.0;
    int grid_n = 5;
    std::int64_t n_mc = 2000;
    constants->add_option("--delta1", delta1, "region slack on ||theta1||");
    constants->add_option("--delta2", delta2, "region bound on |theta2|");
    constants->add_option("--alpha", alpha, "truncation radius");
    constants->add_option("--grid", grid_n, "grid points per region axis");
    constants->add_option("--mc", n_mc, "Monte Carlo sample count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rl->parsed()) {
            const auto res = deq::reproduce_linear(seed, outdir, near_trivial);
            std::cout << res.summary.dump(2) << "\n";
            return res.pass ? 0 : 1;
        }
        if (rs->parsed()) {
            const auto res = deq::reproduce_sigmoid(seed, outdir);
            std::cout << res.summary.dump(2) << "\n";
            return res.pass ? 0 : 1;
        }
        if (flow->parsed() || gd->parsed()) {
            deq::RunConfig config;
            config.seed = seed;
            config.dim = dim;
            config.xi = xi_text.empty() ? deq::Vector::Constant(dim, 2.0)
                                        : parse_xi(xi_text, dim);
            config.dim = static_cast<int>(config.xi.size());
            config.model_activation = deq::Activation::parse(activation_text);
            config.target_activation = config.model_activation;
            config.data = parse_data(data_text, config.dim, seed);
            config.n_samples = n_samples;
            config.solver = solver_text == "brent" ? deq::SolverMethod::Brent
                                                   : deq::SolverMethod::Picard;
            config.tol = tol;
            config.record_stride = stride;
            config.flow_mode = flow->parsed();
            config.flow_step = step;
            config.horizon = horizon;
            config.eta = eta;
            config.epochs = epochs;
            config.experiment = "custom";
            const auto res = deq::run_custom(config, outdir);
            std::cout << res.summary.dump(2) << "\n";
            return res.pass ? 0 : 1;
        }
        if (verify->parsed()) {
            return report_and_exit(deq::run_verify_suite(suite, seed), outdir);
        }
        if (constants->parsed()) {
            const deq::Activation act = deq::Activation::parse(activation_text);
            const deq::Vector xi = xi_text.empty() ? deq::Vector::Constant(dim, 2.0)
                                                   : parse_xi(xi_text, dim);
            const deq::DataModel data = parse_data(data_text, static_cast<int>(xi.size()), seed);
            const deq::TargetModel target(xi, act);
            const deq::ParamRegion region{delta1, delta2, xi.norm()};
            const deq::NonlinearConstants nc =
                deq::nonlinear_constants(region, target, act, data, alpha, grid_n, n_mc);
            deq::Json j{{"activation", act.name()},
                        {"delta1", delta1},
                        {"delta2", delta2},
                        {"alpha", alpha},
                        {"grid_n", nc.rho.grid_n},
                        {"n_mc", nc.rho.n_mc},
                        {"M", nc.M},
                        {"gamma", nc.gamma},
                        {"rho", nc.rho.rho},
                        {"rho_standard_error", nc.rho.standard_error},
                        {"lambda1", nc.lambda1},
                        {"lambda2", nc.lambda2},
                        {"eta_max", nc.eta_max},
                        {"applicable", nc.applicable}};
            if (!nc.applicable)
                j["warning"] = "nonlinearity constant rho is degenerate; the local "
                               "convergence theory does not apply to this configuration";
            std::filesystem::create_directories(outdir);
            deq::write_json(j, (std::filesystem::path(outdir) / "constants.json").string());
            std::cout << j.dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
