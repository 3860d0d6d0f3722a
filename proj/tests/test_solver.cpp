#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "deq/rng.hpp"
#include "deq/solver.hpp"
#include "oracles.hpp"

using deq::Activation;
using deq::Parameter;
using deq::SolverConfig;
using deq::Vector;

namespace {

Parameter p1(double t1, double t2) { return {Vector::Constant(1, t1), t2}; }

Parameter random_contractive(deq::Rng& rng, const Activation& act, int d) {
    Parameter p;
    p.theta1 = rng.normal_vec(d);
    p.theta2 = rng.uniform(-0.9, 0.9) / act.lipschitz_bound();
    return p;
}

}  // namespace

TEST_CASE("picard examples") {
    const auto r1 = deq::picard_solve(p1(1.0, 0.5), Activation::linear(),
                                      Vector::Constant(1, 1.0), 0.0, SolverConfig{});
    REQUIRE(r1.y == Catch::Approx(2.0).margin(1e-11));
    REQUIRE(r1.residual <= 1e-12);

    const auto r2 = deq::picard_solve(p1(2.0, 0.0), Activation::sigmoid(),
                                      Vector::Constant(1, 0.5), 5.0, SolverConfig{});
    REQUIRE(r2.y == Catch::Approx(oracle::kSigmoidOfOne).epsilon(1e-13));

    // fixed point of y = sigmoid(0.5 y), cross-checked against bisection
    const auto r3 =
        deq::picard_solve(p1(2.0, 0.5), Activation::sigmoid(), Vector::Zero(1), SolverConfig{});
    REQUIRE(r3.y == Catch::Approx(oracle::kFixSigmoidHalfY).epsilon(1e-11));
    const double bis = oracle::bisect(
        [](double y) { return y - Activation::sigmoid().value(0.5 * y); }, 0.0, 1.0);
    REQUIRE(r3.y == Catch::Approx(bis).margin(1e-11));
}

TEST_CASE("picard rejects non-contractive parameters and respects budgets") {
    REQUIRE_THROWS_AS(deq::picard_solve(p1(1.0, 1.0), Activation::linear(),
                                        Vector::Constant(1, 1.0), 0.0, SolverConfig{}),
                      deq::ContractionError);
    SolverConfig tiny;
    tiny.max_iterations = 3;
    REQUIRE_THROWS_AS(deq::picard_solve(p1(1.0, 0.99), Activation::linear(),
                                        Vector::Constant(1, 1.0), 0.0, tiny),
                      deq::NoConvergenceError);
}

TEST_CASE("picard iteration count satisfies the geometric certificate") {
    deq::Rng rng(11);
    SolverConfig config;
    for (int i = 0; i < 200; ++i) {
        const Activation act =
            i % 2 == 0 ? Activation::sigmoid() : Activation::tanh();
        const Parameter p = random_contractive(rng, act, 1);
        const Vector x = rng.normal_vec(1);
        const double q = deq::contraction_modulus(p, act);
        const double y0 = deq::picard_default_start(p, act, x) + rng.uniform(-1.0, 1.0);
        std::vector<double> residuals;
        const auto res = deq::picard_solve(p, act, x, y0, config, &residuals);
        REQUIRE(res.residual <= config.tolerance);
        if (q > 1e-6 && residuals.front() > config.tolerance) {
            const double certificate =
                std::ceil(std::log(config.tolerance * (1.0 - q) / residuals.front()) /
                          std::log(q)) +
                1.0;
            REQUIRE(static_cast<double>(res.iterations) <= certificate);
        }
        // residual decay is at least geometric with ratio q
        for (std::size_t k = 1; k < residuals.size(); ++k) {
            if (residuals[k - 1] < 1e-10) break;
            REQUIRE(residuals[k] <= (q + 1e-9) * residuals[k - 1]);
        }
    }
}

TEST_CASE("bracket bound contains the fixed point") {
    const auto [lo, hi] = deq::bracket_from_bound(p1(2.0, 0.5), Activation::sigmoid(),
                                                  Vector::Constant(1, 1.0));
    REQUIRE(hi == Catch::Approx(1.01 * (0.5 + 0.5) / 0.875));
    REQUIRE(lo == -hi);

    const auto [lo0, hi0] = deq::bracket_from_bound(p1(3.0, 0.0), Activation::sigmoid(),
                                                    Vector::Constant(1, 1.0));
    REQUIRE(hi0 >= (0.5 + 0.25 * 3.0) * 1.01 - 1e-12);

    REQUIRE_THROWS_AS(
        deq::bracket_from_bound(p1(1.0, 1.5), Activation::tanh(), Vector::Constant(1, 1.0)),
        deq::ContractionError);

    deq::Rng rng(13);
    for (int i = 0; i < 1000; ++i) {
        const Activation act = i % 2 == 0 ? Activation::sigmoid() : Activation::softplus();
        const int d = 1 + static_cast<int>(rng.raw() % 3);
        const Parameter p = random_contractive(rng, act, d);
        const Vector x = rng.normal_vec(d);
        const auto [a, b] = deq::bracket_from_bound(p, act, x);
        const double y = deq::picard_solve(p, act, x).y;
        REQUIRE(y >= a);
        REQUIRE(y <= b);
    }
}

TEST_CASE("brent examples") {
    const auto r1 = deq::brent_solve(p1(2.0, 0.0), Activation::sigmoid(),
                                     Vector::Constant(1, 0.5));
    REQUIRE(r1.y == Catch::Approx(oracle::kSigmoidOfOne).epsilon(1e-11));

    const auto r2 =
        deq::brent_solve(p1(1.0, 0.9), Activation::linear(), Vector::Constant(1, 1.0));
    REQUIRE(r2.y == Catch::Approx(10.0).margin(1e-9));
    REQUIRE(r2.residual <= 1e-12);

    // y = sigmoid(2 + 0.5 y), cross-checked against bisection
    const auto r3 =
        deq::brent_solve(p1(2.0, 0.5), Activation::sigmoid(), Vector::Constant(1, 1.0));
    REQUIRE(r3.y == Catch::Approx(oracle::kFixSigmoidShifted).epsilon(1e-11));
    const double bis = oracle::bisect(
        [](double y) { return y - Activation::sigmoid().value(2.0 + 0.5 * y); }, 0.0, 4.0);
    REQUIRE(r3.y == Catch::Approx(bis).margin(1e-11));
}

TEST_CASE("brent_root rejects a sign-less bracket") {
    REQUIRE_THROWS_AS(deq::brent_root([](double y) { return y * y + 1.0; }, -1.0, 1.0, 1e-12,
                                      1000),
                      deq::BracketError);
}

TEST_CASE("picard and brent agree on random contractive instances") {
    deq::Rng rng(17);
    const Activation acts[] = {Activation::sigmoid(), Activation::tanh(),
                               Activation::softplus(), Activation::linear()};
    SolverConfig config;
    for (int i = 0; i < 1000; ++i) {
        const Activation act = acts[i % 4];
        const int d = 1 + static_cast<int>(rng.raw() % 3);
        const Parameter p = random_contractive(rng, act, d);
        const Vector x = rng.normal_vec(d);
        const auto yp = deq::picard_solve(p, act, x, config);
        const auto yb = deq::brent_solve(p, act, x, config);
        REQUIRE(std::abs(yp.y - yb.y) <= 10.0 * config.tolerance);
        REQUIRE(yb.residual <= config.tolerance);
    }
}
