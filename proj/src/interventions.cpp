#include "polinfer/interventions.hpp"

#include <algorithm>
#include <cmath>

#include "polinfer/errors.hpp"

namespace polinfer {

const std::string& Intervention::target() const {
    return std::visit([](const auto& a) -> const std::string& { return a.variable; }, action);
}

DiscreteNetwork apply_hard_do(const DiscreteNetwork& net, std::string_view variable,
                              std::string_view state) {
    const auto& var = net.variable(variable);
    const auto s = net.state_of(variable, state);
    std::vector<double> row(var.cardinality(), 0.0);
    row[s] = 1.0;
    DiscreteNetwork out = net;
    out.replace_mechanism(Cpt{var.name, {}, {std::move(row)}});
    return out;
}

namespace {

void check_distribution(const Variable& var, std::span<const double> prior) {
    if (prior.size() != var.cardinality()) {
        throw DomainError("prior for '" + var.name + "' must have " +
                          std::to_string(var.cardinality()) + " entries");
    }
    double sum = 0.0;
    for (double p : prior) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("prior for '" + var.name + "' leaves [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("prior for '" + var.name + "' does not sum to 1");
}

}  // namespace

DiscreteNetwork apply_prior_do(const DiscreteNetwork& net, std::string_view variable,
                               std::span<const double> prior) {
    const auto id = net.index_of(variable);
    const auto& var = net.variable(id);
    if (!net.is_root(id)) {
        throw SemanticsError("prior replacement needs a parentless variable; '" + var.name +
                             "' has parents");
    }
    check_distribution(var, prior);
    DiscreteNetwork out = net;
    out.replace_mechanism(Cpt{var.name, {}, {std::vector<double>(prior.begin(), prior.end())}});
    return out;
}

void check_scenario(const Scenario& scenario, const TwoSliceDBN& dbn, int horizon) {
    const auto& net = dbn.initial;
    const auto& list = scenario.interventions;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& iv = list[i];
        const auto& w = iv.window;
        if (w.first < 1 || w.last > horizon || w.first > w.last) {
            throw WindowError("window [" + std::to_string(w.first) + "," + std::to_string(w.last) +
                              "] for '" + iv.target() + "' is outside [1," + std::to_string(horizon) +
                              "] or inverted");
        }
        const auto id = net.index_of(iv.target());
        if (const auto* hard = std::get_if<HardDo>(&iv.action)) {
            net.state_of(hard->variable, hard->state);
        } else {
            const auto& prior = std::get<PriorDo>(iv.action);
            const bool intra_root = std::none_of(dbn.intra_edges.begin(), dbn.intra_edges.end(),
                                                 [&](const Edge& e) { return e.to == prior.variable; });
            if (!net.is_root(id) || !intra_root || dbn.has_temporal_parents(prior.variable)) {
                throw SemanticsError("prior replacement needs a parentless variable; '" +
                                     prior.variable + "' has parents");
            }
            check_distribution(net.variable(id), prior.prior);
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (list[j].target() == iv.target() && list[j].window.overlaps(w)) {
                throw ConflictError("two interventions on '" + iv.target() + "' overlap in time");
            }
        }
    }
}

UnrolledNetwork compose(const Scenario& scenario, const UnrolledNetwork& unrolled) {
    const auto& list = scenario.interventions;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& w = list[i].window;
        if (w.first < 1 || w.last > unrolled.horizon || w.first > w.last) {
            throw WindowError("window for '" + list[i].target() + "' is outside the horizon");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (list[j].target() == list[i].target() && list[j].window.overlaps(w)) {
                throw ConflictError("two interventions on '" + list[i].target() + "' overlap in time");
            }
        }
    }

    UnrolledNetwork out = unrolled;
    for (const auto& iv : list) {
        for (int t = iv.window.first; t <= iv.window.last; ++t) {
            const auto node = slice_name(iv.target(), t);
            if (const auto* hard = std::get_if<HardDo>(&iv.action)) {
                out.net = apply_hard_do(out.net, node, hard->state);
            } else {
                out.net = apply_prior_do(out.net, node, std::get<PriorDo>(iv.action).prior);
            }
        }
    }
    return out;
}

}  // namespace polinfer
