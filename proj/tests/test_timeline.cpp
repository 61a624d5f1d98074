#include <cmath>

#include "doctest.h"
#include "polinfer/errors.hpp"
#include "polinfer/timeline.hpp"
#include "support.hpp"

using namespace polinfer;

namespace {

UtilitySpec output_spec() { return UtilitySpec::equal_weights({{"Output", "High"}, {"State", "Good"}}); }

}  // namespace

TEST_CASE("timeline records one entry per slice") {
    const auto dbn = testing::persistence_dbn();
    const auto tl = run_scenario(dbn, {"base", "", {}}, 5, output_spec());
    REQUIRE(tl.records.size() == 5);
    for (int t = 1; t <= 5; ++t) {
        const auto& r = tl.records[t - 1];
        CHECK(r.slice == t);
        CHECK(r.marginals.size() == 3);
        CHECK(r.good_probabilities.size() == 2);
        CHECK(r.contributions[0] + r.contributions[1] == doctest::Approx(r.utility));
    }
    // Slice 1: P(State=Good) = 0.52, P(Output=High) = 0.52*0.9 + 0.48*0.25.
    CHECK(tl.records[0].utility == doctest::Approx(50.0 * (0.52 + 0.52 * 0.9 + 0.48 * 0.25)));
}

TEST_CASE("a temporary fix decays back toward the baseline") {
    const auto dbn = testing::persistence_dbn();
    const Intervention fix{HardDo{"State", "Good"}, {1, 2}};
    const auto base = run_scenario(dbn, {"base", "", {}}, 12, output_spec());
    const auto pulse = run_scenario(dbn, {"pulse", "", {fix}}, 12, output_spec());
    CHECK(pulse.records[1].utility > base.records[1].utility);
    for (int t = 3; t < 12; ++t) CHECK(pulse.records[t].utility <= pulse.records[t - 1].utility + 1e-12);
    CHECK(std::abs(pulse.records[11].utility - base.records[11].utility) < 1e-3);
}

TEST_CASE("filtered marginals agree with the unrolled run") {
    const auto dbn = testing::persistence_dbn();
    const Scenario s{"s", "", {{PriorDo{"Policy", {1.0, 0.0}}, {3, 8}}}};
    const auto tl = run_scenario(dbn, s, 8, output_spec());
    const std::vector<std::string> vars{"State", "Output"};
    const auto f = filter_marginals(dbn, s, 8, vars);
    for (int t = 0; t < 8; ++t) {
        CHECK(std::abs(f[t][0].probability("Good") - tl.records[t].marginals[1].probability("Good")) < 1e-12);
        CHECK(std::abs(f[t][1].probability("High") - tl.records[t].marginals[2].probability("High")) < 1e-12);
    }
}

TEST_CASE("steady state detection") {
    const std::vector<double> plateau{38.8, 41.10, 41.5, 41.63, 41.63, 41.63, 41.63};
    CHECK(steady_state_check(plateau, 0.05) == 4);
    const std::vector<double> single{24.63};
    CHECK(steady_state_check(single, 0.01) == 1);
    const std::vector<double> rising{1, 2, 3, 4};
    CHECK_FALSE(steady_state_check(rising, 0.5).has_value());
    const std::vector<double> flat{5, 5, 5};
    CHECK(steady_state_check(flat, 0.01) == 1);
    const std::vector<double> empty;
    CHECK_THROWS_AS(steady_state_check(empty, 0.01), DomainError);
}

TEST_CASE("invalid scenarios are rejected before any inference") {
    const auto dbn = testing::persistence_dbn();
    const Intervention bad{HardDo{"State", "Good"}, {0, 2}};
    CHECK_THROWS_AS(run_scenario(dbn, {"bad", "", {bad}}, 3, output_spec()), WindowError);
}
