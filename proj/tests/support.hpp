#pragma once

#include <random>
#include <string>
#include <vector>

#include "polinfer/network.hpp"
#include "polinfer/temporal.hpp"

namespace testing {

using polinfer::Cpt;
using polinfer::DiscreteNetwork;

inline std::vector<double> random_row(std::mt19937_64& rng, std::size_t width) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> row(width);
    double sum = 0.0;
    for (auto& v : row) sum += (v = u(rng));
    for (auto& v : row) v /= sum;
    return row;
}

/// Random binary DAG: nodes N00..N{n-1} in topological order, each earlier node
/// a parent with probability `density`, at most `max_parents` parents.
inline DiscreteNetwork random_binary_network(std::mt19937_64& rng, std::size_t n, double density = 0.35,
                                             std::size_t max_parents = 3) {
    DiscreteNetwork net;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back((i < 10 ? "N0" : "N") + std::to_string(i));
        net.add_variable({names.back(), {"s0", "s1"}});
    }
    std::bernoulli_distribution coin(density);
    for (std::size_t i = 0; i < n; ++i) {
        Cpt cpt{names[i], {}, {}};
        for (std::size_t j = 0; j < i && cpt.parents.size() < max_parents; ++j) {
            if (coin(rng)) {
                cpt.parents.push_back(names[j]);
                net.add_edge(names[j], names[i]);
            }
        }
        for (std::size_t r = 0; r < (std::size_t{1} << cpt.parents.size()); ++r) {
            cpt.rows.push_back(random_row(rng, 2));
        }
        net.set_cpt(std::move(cpt));
    }
    return net;
}

/// Cloudy -> {Sprinkler, Rain} -> WetGrass, with the textbook numbers.
inline DiscreteNetwork sprinkler() {
    DiscreteNetwork net;
    net.add_variable({"Cloudy", {"T", "F"}});
    net.add_variable({"Sprinkler", {"T", "F"}});
    net.add_variable({"Rain", {"T", "F"}});
    net.add_variable({"WetGrass", {"T", "F"}});
    net.add_edge("Cloudy", "Sprinkler");
    net.add_edge("Cloudy", "Rain");
    net.add_edge("Sprinkler", "WetGrass");
    net.add_edge("Rain", "WetGrass");
    net.set_cpt({"Cloudy", {}, {{0.5, 0.5}}});
    net.set_cpt({"Sprinkler", {"Cloudy"}, {{0.1, 0.9}, {0.5, 0.5}}});
    net.set_cpt({"Rain", {"Cloudy"}, {{0.8, 0.2}, {0.2, 0.8}}});
    net.set_cpt({"WetGrass", {"Sprinkler", "Rain"}, {{0.99, 0.01}, {0.9, 0.1}, {0.9, 0.1}, {0.0, 1.0}}});
    return net;
}

/// Small DBN: root Policy drives State, which persists through a self edge;
/// Output reads the current State.
inline polinfer::TwoSliceDBN persistence_dbn() {
    polinfer::TwoSliceDBN dbn;
    auto& net = dbn.initial;
    net.add_variable({"Policy", {"On", "Off"}});
    net.add_variable({"State", {"Good", "Poor"}});
    net.add_variable({"Output", {"High", "Low"}});
    net.add_edge("Policy", "State");
    net.add_edge("State", "Output");
    net.set_cpt({"Policy", {}, {{0.3, 0.7}}});
    net.set_cpt({"State", {"Policy"}, {{0.8, 0.2}, {0.4, 0.6}}});
    net.set_cpt({"Output", {"State"}, {{0.9, 0.1}, {0.25, 0.75}}});
    dbn.intra_edges = {{"Policy", "State"}, {"State", "Output"}};
    dbn.temporal_edges = {{"State", "State"}};
    using polinfer::Lag;
    dbn.transition_cpts = {
        {"Policy", {}, {{0.3, 0.7}}},
        {"State",
         {{"Policy", Lag::Current}, {"State", Lag::Previous}},
         {{0.9, 0.1}, {0.6, 0.4}, {0.55, 0.45}, {0.2, 0.8}}},
        {"Output", {{"State", Lag::Current}}, {{0.9, 0.1}, {0.25, 0.75}}},
    };
    return dbn;
}

}  // namespace testing
