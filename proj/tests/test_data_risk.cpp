#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "deq/data.hpp"
#include "deq/risk.hpp"
#include "deq/rng.hpp"
#include "oracles.hpp"

using deq::Activation;
using deq::DataModel;
using deq::MomentSummary;
using deq::Parameter;
using deq::TargetModel;
using deq::Vector;

namespace {

Parameter p1(double t1, double t2) { return {Vector::Constant(1, t1), t2}; }

double rel_err(const Vector& a, const Vector& b) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-10});
}

}  // namespace

TEST_CASE("second moment of the unit uniform is 1/3 in one dimension") {
    const auto m = deq::second_moment(DataModel::uniform_unit(1, 5), 1);
    REQUIRE(m.sigma_matrix()(0, 0) == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
    REQUIRE(m.lambda_min() == Catch::Approx(1.0 / 3.0).epsilon(1e-10));
    REQUIRE(m.lambda_max() == Catch::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("second moment of an explicit sample list") {
    const auto m = deq::second_moment(
        DataModel::empirical({Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)}), 1);
    REQUIRE(m.sigma_matrix()(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("gaussian second moment matches its analytic target within 3 SE") {
    const std::int64_t n = 100000;
    const auto m = deq::second_moment(DataModel::gaussian_iso(2, 1.0, 9), n);
    // Var(X_i^2) = 2, Var(X_i X_j) = 1 for a standard normal
    const double se_diag = std::sqrt(2.0 / n), se_off = std::sqrt(1.0 / n);
    REQUIRE(std::abs(m.sigma_matrix()(0, 0) - 1.0) <= 3.0 * se_diag);
    REQUIRE(std::abs(m.sigma_matrix()(1, 1) - 1.0) <= 3.0 * se_diag);
    REQUIRE(std::abs(m.sigma_matrix()(0, 1)) <= 3.0 * se_off);
}

TEST_CASE("truncated second moment is nondecreasing and bounded by the trace") {
    const auto m1 = deq::second_moment(DataModel::uniform_unit(1, 5), 1);
    REQUIRE(m1.truncated_second_moment(0.5) == Catch::Approx(0.125 / 3.0));
    REQUIRE(m1.truncated_second_moment(2.0) == Catch::Approx(1.0 / 3.0));

    for (const auto& m :
         {deq::second_moment(DataModel::gaussian_iso(2, 1.0, 9), 5000),
          deq::second_moment(DataModel::uniform_unit(3, 4), 5000)}) {
        double prev = 0.0;
        for (double a : {0.25, 0.5, 1.0, 2.0, 4.0, 100.0}) {
            const double t = m.truncated_second_moment(a);
            REQUIRE(t >= prev);
            prev = t;
        }
        REQUIRE(prev <= m.trace() * (1.0 + 0.05));  // MC paths: 3-sigma headroom
    }
}

TEST_CASE("linear risk examples") {
    const TargetModel target(Vector::Constant(1, 2.0), Activation::linear());
    const auto m = MomentSummary::from_matrix(deq::Matrix::Constant(1, 1, 1.0 / 3.0));

    REQUIRE(deq::linear_risk(p1(1.0, 0.5), target, m) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(deq::linear_risk(p1(1.0, 0.0), target, m) == Catch::Approx(1.0 / 3.0));
    REQUIRE_THROWS_AS(deq::linear_risk(p1(1.0, 1.0 - 1e-12), target, m),
                      deq::SingularityError);

    deq::Rng rng(23);
    SECTION("matches the Monte Carlo population risk within 3 SE") {
        const Parameter p = p1(0.7, -0.4);
        const double analytic = deq::linear_risk(p, target, m);
        const std::int64_t n = 100000;
        double s1 = 0.0, s2 = 0.0;
        const double phi = 0.7 / 1.4;
        for (std::int64_t i = 0; i < n; ++i) {
            const double x = rng.uniform01();
            const double v = (phi * x - 2.0 * x) * (phi * x - 2.0 * x);
            s1 += v;
            s2 += v * v;
        }
        const double mean = s1 / n;
        const double se = std::sqrt((s2 / n - mean * mean) / n);
        REQUIRE(std::abs(analytic - mean) <= 3.0 * se);
    }
}

TEST_CASE("linear risk gradient examples and finite differences") {
    const TargetModel target(Vector::Constant(1, 2.0), Activation::linear());
    const auto m = MomentSummary::from_matrix(deq::Matrix::Constant(1, 1, 1.0 / 3.0));

    for (double a : {0.5, 0.3, 1.0, -0.7}) {  // solution line (a*xi, 1-a)
        const Parameter on_line = p1(2.0 * a, 1.0 - a);
        REQUIRE(deq::linear_risk(on_line, target, m) <= 1e-28);
        REQUIRE(deq::linear_risk_grad(on_line, target, m).flat().norm() <= 1e-14);
    }

    const Parameter g = deq::linear_risk_grad(p1(1.0, 0.0), target, m);
    REQUIRE(g.theta1(0) == Catch::Approx(-2.0 / 3.0));
    REQUIRE(g.theta2 == Catch::Approx(-2.0 / 3.0));

    deq::Rng rng(29);
    for (int i = 0; i < 200; ++i) {
        const int d = 1 + static_cast<int>(rng.raw() % 3);
        deq::Matrix a(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) a(r, c) = rng.normal();
        const auto moments = MomentSummary::from_matrix(a * a.transpose() +
                                                        deq::Matrix::Identity(d, d) * 0.1);
        const TargetModel t(rng.normal_vec(d) + Vector::Constant(d, 0.5),
                            Activation::linear());
        Parameter p;
        p.theta1 = rng.normal_vec(d);
        do {
            p.theta2 = rng.uniform(-1.5, 1.5);
        } while (std::abs(1.0 - p.theta2) < 0.2);

        const Parameter an = deq::linear_risk_grad(p, t, moments);
        const Parameter fd = deq::fd_grad(
            [&](const Parameter& q) { return deq::linear_risk(q, t, moments); }, p, 1e-6);
        REQUIRE(rel_err(an.flat(), fd.flat()) <= 1e-6);
    }
}

TEST_CASE("gradient block identity and orthogonality at 1000 random points") {
    deq::Rng rng(83);
    for (int i = 0; i < 1000; ++i) {
        const int d = 1 + static_cast<int>(rng.raw() % 3);
        deq::Matrix a(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) a(r, c) = rng.normal();
        const auto moments = MomentSummary::from_matrix(a * a.transpose() +
                                                        deq::Matrix::Identity(d, d) * 0.1);
        const TargetModel t(rng.normal_vec(d) + Vector::Constant(d, 0.5),
                            Activation::linear());
        Parameter p;
        p.theta1 = rng.normal_vec(d);
        do {
            p.theta2 = rng.uniform(-1.5, 1.5);
        } while (std::abs(1.0 - p.theta2) < 0.2);
        const Parameter g = deq::linear_risk_grad(p, t, moments);

        // theta1 . g1 = (1 - theta2) g2, the mechanism behind the conservation law
        const double lhs = p.theta1.dot(g.theta1);
        const double rhs = (1.0 - p.theta2) * g.theta2;
        REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));

        // equivalently, the gradient is orthogonal to theta - (0, 1)
        const double ortho = p.theta1.dot(g.theta1) + (p.theta2 - 1.0) * g.theta2;
        REQUIRE(std::abs(ortho) <=
                1e-12 * std::max(1.0, p.flat().norm() * g.flat().norm()));
    }
}

TEST_CASE("implicit output gradient examples and solver finite differences") {
    SECTION("linear activation, theta2 = 0") {
        const Vector x = Vector::Constant(1, 0.7);
        deq::FixedPointResult fp;
        fp.y = 1.4;
        fp.preactivation = 1.4;
        const Parameter g =
            deq::implicit_output_grad(p1(2.0, 0.0), Activation::linear(), x, fp);
        REQUIRE(g.theta1(0) == Catch::Approx(0.7));
        REQUIRE(g.theta2 == Catch::Approx(1.4));
    }
    SECTION("sigmoid at theta2 = 0") {
        const Vector x = Vector::Constant(1, 0.5);
        const auto fp = deq::picard_solve(p1(2.0, 0.0), Activation::sigmoid(), x);
        const Parameter g =
            deq::implicit_output_grad(p1(2.0, 0.0), Activation::sigmoid(), x, fp);
        REQUIRE(g.theta1(0) ==
                Catch::Approx(oracle::kSigmoidPrimeOfOne * 0.5).epsilon(1e-10));
        REQUIRE(g.theta2 ==
                Catch::Approx(oracle::kSigmoidPrimeOfOne * oracle::kSigmoidOfOne).epsilon(1e-10));
    }
    SECTION("random contractive points against FD through the solver") {
        // the 1e-6 target needs the solver noise floor well below h times
        // the gradient scale, so solve tighter and keep preactivations
        // moderate
        deq::Rng rng(31);
        deq::SolverConfig tight;
        tight.tolerance = 1e-14;
        const Activation acts[] = {Activation::sigmoid(), Activation::tanh(),
                                   Activation::softplus()};
        for (int i = 0; i < 200; ++i) {
            const Activation act = acts[i % 3];
            const int d = 1 + static_cast<int>(rng.raw() % 2);
            Parameter p;
            p.theta1 = rng.normal_vec(d, 0.0, 0.6);
            p.theta2 = rng.uniform(-0.7, 0.7) / act.lipschitz_bound();
            const Vector x = rng.normal_vec(d, 0.0, 0.8);
            const auto fp = deq::picard_solve(p, act, x, tight);
            const Parameter an = deq::implicit_output_grad(p, act, x, fp);
            const Parameter fd = deq::fd_grad(
                [&](const Parameter& q) { return deq::picard_solve(q, act, x, tight).y; }, p,
                1e-5);
            REQUIRE(rel_err(an.flat(), fd.flat()) <= 1e-6);
        }
    }
}

TEST_CASE("empirical risk and gradient") {
    const Vector xi = Vector::Constant(1, 2.0);

    SECTION("well-specified optimum has zero risk and gradient") {
        const TargetModel target(xi, Activation::sigmoid());
        const auto samples = DataModel::uniform_unit(1, 37).sample(50);
        const Parameter at_target{xi, 0.0};
        REQUIRE(deq::empirical_risk(at_target, target, Activation::sigmoid(), samples) <=
                1e-24);
        REQUIRE(deq::empirical_risk_grad(at_target, target, Activation::sigmoid(), samples)
                    .flat()
                    .norm() <= 1e-12);
    }

    SECTION("single linear sample") {
        const TargetModel target(xi, Activation::linear());
        const std::vector<Vector> samples = {Vector::Constant(1, 1.0)};
        REQUIRE(deq::empirical_risk(p1(1.0, 0.0), target, Activation::linear(), samples) ==
                Catch::Approx(1.0));
        const Parameter g =
            deq::empirical_risk_grad(p1(1.0, 0.0), target, Activation::linear(), samples);
        REQUIRE(g.theta1(0) == Catch::Approx(-2.0));
        REQUIRE(g.theta2 == Catch::Approx(-2.0));
    }

    SECTION("gradient matches FD with common samples") {
        deq::Rng rng(41);
        deq::SolverConfig tight;
        tight.tolerance = 1e-13;
        const TargetModel target(xi, Activation::sigmoid());
        const auto samples = DataModel::uniform_unit(1, 43).sample(100);
        for (int i = 0; i < 20; ++i) {
            Parameter p;
            p.theta1 = rng.normal_vec(1);
            p.theta2 = rng.uniform(-3.0, 3.0);
            const Parameter an =
                deq::empirical_risk_grad(p, target, Activation::sigmoid(), samples, tight);
            const Parameter fd = deq::fd_grad(
                [&](const Parameter& q) {
                    return deq::empirical_risk(q, target, Activation::sigmoid(), samples,
                                               tight);
                },
                p, 1e-5);
            REQUIRE(rel_err(an.flat(), fd.flat()) <= 1e-5);
        }
    }

    SECTION("linear empirical risk equals the moment form") {
        deq::Rng rng(47);
        const auto data = DataModel::uniform_unit(2, 53);
        const auto samples = data.sample(200);
        const auto moments = deq::second_moment(DataModel::empirical(samples), 1);
        const TargetModel target(rng.normal_vec(2) + Vector::Constant(2, 0.3),
                                 Activation::linear());
        deq::SolverConfig tight;  // keep the equilibrium error under the comparison tolerance
        tight.tolerance = 1e-14;
        for (int i = 0; i < 50; ++i) {
            Parameter p;
            p.theta1 = rng.normal_vec(2);
            do {
                p.theta2 = rng.uniform(-0.9, 0.9);
            } while (std::abs(1.0 - p.theta2) < 0.2);
            const double emp =
                deq::empirical_risk(p, target, Activation::linear(), samples, tight);
            const double pop = deq::linear_risk(p, target, moments);
            REQUIRE(emp == Catch::Approx(pop).epsilon(1e-12));
        }
    }

    SECTION("solver failures carry the sample index") {
        const TargetModel target(xi, Activation::tanh());
        const std::vector<Vector> samples = {Vector::Constant(1, 0.5)};
        REQUIRE_THROWS_WITH(
            deq::empirical_risk(p1(1.0, 1.5), target, Activation::tanh(), samples),
            Catch::Matchers::ContainsSubstring("sample 0"));
    }
}

TEST_CASE("fd_grad on a quadratic") {
    const Parameter p{Vector::Constant(2, 1.5), -0.5};
    const Parameter g = deq::fd_grad(
        [](const Parameter& q) { return q.flat().squaredNorm(); }, p, 1e-6);
    REQUIRE(g.theta1(0) == Catch::Approx(3.0).margin(1e-8));
    REQUIRE(g.theta1(1) == Catch::Approx(3.0).margin(1e-8));
    REQUIRE(g.theta2 == Catch::Approx(-1.0).margin(1e-8));
    REQUIRE_THROWS_AS(deq::fd_grad([](const Parameter&) { return 0.0; }, p, 0.0),
                      deq::InputError);
}
