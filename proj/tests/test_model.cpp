#include <catch2/catch_amalgamated.hpp>

#include "deq/model.hpp"
#include "deq/rng.hpp"
#include "oracles.hpp"

using deq::Activation;
using deq::Parameter;
using deq::Vector;

TEST_CASE("eval_g examples") {
    REQUIRE(deq::eval_g({Vector::Constant(1, 2.0), 0.0}, Activation::linear(),
                        Vector::Constant(1, 0.5), 7.0) == Catch::Approx(1.0));
    REQUIRE(deq::eval_g({Vector::Constant(1, 2.0), 0.0}, Activation::sigmoid(),
                        Vector::Constant(1, 0.5), 0.0) ==
            Catch::Approx(oracle::kSigmoidOfOne).epsilon(1e-14));
    Vector t1(2), x(2);
    t1 << 1.0, 1.0;
    x << 1.0, 2.0;
    REQUIRE(deq::eval_g({t1, 0.5}, Activation::linear(), x, 2.0) == Catch::Approx(4.0));
}

TEST_CASE("eval_g rejects dimension mismatch") {
    REQUIRE_THROWS_AS(deq::eval_g({Vector::Constant(2, 1.0), 0.0}, Activation::linear(),
                                  Vector::Constant(1, 1.0), 0.0),
                      deq::InputError);
}

TEST_CASE("closed-form linear output") {
    REQUIRE(deq::closed_form_linear_output({Vector::Constant(1, 1.0), 0.5},
                                           Vector::Constant(1, 1.0)) == Catch::Approx(2.0));
    REQUIRE(deq::closed_form_linear_output({Vector::Constant(1, 2.0), 0.0},
                                           Vector::Constant(1, 0.3)) == Catch::Approx(0.6));
    REQUIRE_THROWS_AS(deq::closed_form_linear_output({Vector::Constant(1, 1.0), 1.0 - 1e-15},
                                                     Vector::Constant(1, 1.0)),
                      deq::SingularityError);
}

TEST_CASE("closed form is the fixed point of the linear map") {
    deq::Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const int d = 1 + static_cast<int>(rng.raw() % 3);
        Parameter p;
        p.theta1 = rng.normal_vec(d);
        do {
            p.theta2 = rng.uniform(-2.0, 2.0);
        } while (std::abs(1.0 - p.theta2) < 0.1);
        const Vector x = rng.normal_vec(d);
        const double y = deq::closed_form_linear_output(p, x);
        const double gy = deq::eval_g(p, Activation::linear(), x, y);
        REQUIRE(std::abs(y - gy) <= 1e-12 * std::max(1.0, std::abs(y)));
    }
}

TEST_CASE("contraction modulus") {
    REQUIRE(deq::contraction_modulus({Vector::Zero(1), 0.5}, Activation::sigmoid()) ==
            Catch::Approx(0.125));
    REQUIRE(deq::contraction_modulus({Vector::Zero(1), 0.0}, Activation::tanh()) == 0.0);
    REQUIRE(deq::contraction_modulus({Vector::Zero(1), 1.2}, Activation::tanh()) ==
            Catch::Approx(1.2));
}
