#include <catch2/catch_amalgamated.hpp>

#include "deq/activation.hpp"
#include "deq/rng.hpp"
#include "oracles.hpp"

using deq::Activation;

namespace {
const Activation kAll[] = {Activation::linear(), Activation::sigmoid(), Activation::tanh(),
                           Activation::softplus()};
}

TEST_CASE("derivative stays within [0, L] on a dense grid") {
    for (const Activation& act : kAll) {
        const double lip = act.lipschitz_bound();
        double sup = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double z = -20.0 + 40.0 * i / 9999.0;
            const double d = act.derivative(z);
            INFO(act.name() << " at z=" << z);
            REQUIRE(d >= 0.0);
            REQUIRE(d <= lip);
            sup = std::max(sup, d);
        }
        // the certified bound is the supremum, approached on the grid
        REQUIRE(sup >= lip - 1e-4);
    }
}

TEST_CASE("value is L-Lipschitz at grid scale") {
    const double h = 1e-3;
    for (const Activation& act : kAll) {
        const double lip = act.lipschitz_bound();
        for (int i = 0; i < 10000; ++i) {
            const double z = -20.0 + 40.0 * i / 9999.0;
            REQUIRE(std::abs(act.value(z + h) - act.value(z)) <= lip * h + 1e-12);
        }
    }
}

TEST_CASE("derivative matches central finite differences") {
    deq::Rng rng(7);
    const double h = 1e-6;
    for (const Activation& act : kAll) {
        for (int i = 0; i < 1000; ++i) {
            const double z = rng.uniform(-8.0, 8.0);
            const double fd = (act.value(z + h) - act.value(z - h)) / (2.0 * h);
            const double an = act.derivative(z);
            REQUIRE(std::abs(fd - an) <= 1e-6 * std::max(std::abs(an), 1e-3));
        }
    }
}

TEST_CASE("reference values") {
    REQUIRE(Activation::sigmoid().value(1.0) ==
            Catch::Approx(oracle::kSigmoidOfOne).epsilon(1e-14));
    REQUIRE(Activation::sigmoid().derivative(1.0) ==
            Catch::Approx(oracle::kSigmoidPrimeOfOne).epsilon(1e-14));
    REQUIRE(Activation::tanh().derivative(1.0) ==
            Catch::Approx(oracle::kTanhPrimeOfOne).epsilon(1e-14));
    REQUIRE(Activation::linear().value(3.5) == 3.5);
    REQUIRE(Activation::softplus().value(0.5) == Catch::Approx(0.9740769841801067));
}

TEST_CASE("extreme arguments do not overflow") {
    REQUIRE(Activation::softplus().value(1000.0) == Catch::Approx(1000.0));
    REQUIRE(Activation::softplus().value(-1000.0) == 0.0);
    REQUIRE(Activation::sigmoid().value(-745.0) >= 0.0);
    REQUIRE(Activation::sigmoid().value(745.0) == Catch::Approx(1.0));
    REQUIRE(std::isfinite(Activation::tanh().derivative(750.0)));
}

TEST_CASE("parse round-trips names") {
    for (const Activation& act : kAll)
        REQUIRE(Activation::parse(act.name()).kind() == act.kind());
    REQUIRE_THROWS_AS(Activation::parse("relu"), deq::InputError);
}
