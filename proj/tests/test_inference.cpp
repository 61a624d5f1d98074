#include <cmath>
#include <random>

#include "doctest.h"
#include "polinfer/errors.hpp"
#include "polinfer/inference.hpp"
#include "support.hpp"

using namespace polinfer;

namespace {

double max_gap(const Marginal& a, const Marginal& b) {
    double gap = 0.0;
    for (std::size_t i = 0; i < a.distribution.size(); ++i) {
        gap = std::max(gap, std::abs(a.distribution[i] - b.distribution[i]));
    }
    return gap;
}

}  // namespace

TEST_CASE("sprinkler posteriors match hand-computed values") {
    const auto net = testing::sprinkler();
    // P(WetGrass=T) = sum over C,S,R.
    const auto wet = posterior_marginal(net, "WetGrass");
    CHECK(wet.probability("T") == doctest::Approx(0.6471).epsilon(1e-4));
    const auto rain = posterior_marginal(net, "Rain", {{"WetGrass", "T"}});
    CHECK(rain.probability("T") == doctest::Approx(0.7079).epsilon(1e-3));
    CHECK(max_gap(rain, enumeration_oracle(net, "Rain", {{"WetGrass", "T"}})) < 1e-12);
}

TEST_CASE("variable elimination equals enumeration on random networks") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 60; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
        const auto net = testing::random_binary_network(rng, n);
        const auto& ev = net.variable(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)).name;
        const Evidence evidence{{ev, "s1"}};
        for (const auto& v : net.variables()) {
            CHECK(max_gap(posterior_marginal(net, v.name), enumeration_oracle(net, v.name)) < 1e-10);
            CHECK(max_gap(posterior_marginal(net, v.name, evidence), enumeration_oracle(net, v.name, evidence)) <
                  1e-10);
        }
    }
}

TEST_CASE("elimination order does not change answers") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = testing::random_binary_network(rng, 9, 0.5);
        const QueryOptions reverse{TieBreak::ReverseLexicographic};
        for (const auto& v : net.variables()) {
            CHECK(max_gap(posterior_marginal(net, v.name), posterior_marginal(net, v.name, {}, reverse)) < 1e-12);
        }
    }
}

TEST_CASE("evidence on the target yields a point mass") {
    const auto net = testing::sprinkler();
    const auto m = posterior_marginal(net, "Rain", {{"Rain", "F"}});
    CHECK(m.distribution == std::vector<double>{0.0, 1.0});
}

TEST_CASE("impossible evidence is reported") {
    auto net = testing::sprinkler();
    net.set_cpt({"Cloudy", {}, {{1.0, 0.0}}});
    CHECK_THROWS_AS(posterior_marginal(net, "Rain", {{"Cloudy", "F"}}), ImpossibleEvidence);
    CHECK_THROWS_AS(enumeration_oracle(net, "Rain", {{"Cloudy", "F"}}), ImpossibleEvidence);
}

TEST_CASE("unknown names are lookup errors") {
    const auto net = testing::sprinkler();
    CHECK_THROWS_AS(posterior_marginal(net, "Snow"), LookupError);
    CHECK_THROWS_AS(posterior_marginal(net, "Rain", {{"Cloudy", "maybe"}}), LookupError);
}

TEST_CASE("enumeration refuses oversized state spaces") {
    std::mt19937_64 rng(5);
    const auto net = testing::random_binary_network(rng, 12);
    CHECK_THROWS_AS(enumeration_oracle(net, "N00", {}, 1024), StateSpaceTooLarge);
}

TEST_CASE("joint query matches enumeration") {
    const auto net = testing::sprinkler();
    const std::vector<std::string> targets{"WetGrass", "Cloudy"};
    const auto ve = joint_query(net, targets, {{"Sprinkler", "T"}});
    const auto en = enumeration_joint(net, targets, {{"Sprinkler", "T"}});
    REQUIRE(ve.values().size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(ve.values()[i] - en.values()[i]) < 1e-12);
    CHECK(ve.scope() == std::vector<std::size_t>{net.index_of("WetGrass"), net.index_of("Cloudy")});
}
