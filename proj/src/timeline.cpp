#include "polinfer/timeline.hpp"

#include <cmath>

#include "polinfer/errors.hpp"

namespace polinfer {

std::vector<double> UtilityTimeline::utilities() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.utility);
    return out;
}

namespace {

SliceRecord make_record(int slice, std::vector<Marginal> marginals, const UtilitySpec& spec) {
    SliceRecord rec;
    rec.slice = slice;
    for (const auto& t : spec.targets) {
        for (const auto& m : marginals) {
            if (m.variable == t.variable) rec.good_probabilities.push_back(m.probability(t.good_state));
        }
    }
    rec.contributions = utility_contributions(marginals, spec);
    rec.utility = utility(marginals, spec);
    rec.marginals = std::move(marginals);
    return rec;
}

}  // namespace

UtilityTimeline run_scenario(const TwoSliceDBN& dbn, const Scenario& scenario, int horizon,
                             const UtilitySpec& spec) {
    check_scenario(scenario, dbn, horizon);
    spec.check();
    const auto unrolled = compose(scenario, unroll(dbn, horizon));

    UtilityTimeline timeline{scenario.name, {}};
    for (int t = 1; t <= horizon; ++t) {
        std::vector<Marginal> marginals;
        for (const auto& v : unrolled.slice_variables) {
            auto m = posterior_marginal(unrolled.net, slice_name(v, t));
            m.variable = v;
            marginals.push_back(std::move(m));
        }
        timeline.records.push_back(make_record(t, std::move(marginals), spec));
    }
    return timeline;
}

std::vector<std::vector<Marginal>> filter_marginals(const TwoSliceDBN& dbn, const Scenario& scenario,
                                                    int horizon, std::span<const std::string> variables) {
    check_scenario(scenario, dbn, horizon);
    const auto report = validate(dbn);
    if (!report.ok()) throw StructuralError("invalid DBN:\n" + report.summary());

    const auto& init = dbn.initial;
    const std::size_t n = init.size();
    // Workspace numbering: [0, n) previous slice, [n, 2n) current slice.
    std::vector<std::string> names(2 * n);
    std::vector<std::size_t> cards(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        names[i] = "0 " + init.variable(i).name;
        names[n + i] = "1 " + init.variable(i).name;
        cards[i] = cards[n + i] = init.variable(i).cardinality();
    }
    std::vector<std::size_t> interface_ids;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : dbn.temporal_edges) {
            if (e.from == init.variable(i).name) {
                interface_ids.push_back(i);
                break;
            }
        }
    }
    std::vector<std::size_t> wanted;
    for (const auto& v : variables) wanted.push_back(init.index_of(v));

    auto table = [&](const std::vector<std::size_t>& scope, const std::vector<std::vector<double>>& rows) {
        std::vector<std::size_t> fc;
        for (auto s : scope) fc.push_back(cards[s]);
        std::vector<double> values;
        for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
        return Factor(scope, std::move(fc), std::move(values));
    };

    std::vector<std::vector<Marginal>> out;
    std::optional<Factor> belief;
    for (int t = 1; t <= horizon; ++t) {
        std::vector<Factor> factors;
        if (belief) factors.push_back(*belief);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& var = init.variable(i);
            const Intervention* active = nullptr;
            for (const auto& iv : scenario.interventions) {
                if (iv.target() == var.name && iv.window.contains(t)) active = &iv;
            }
            if (active) {
                std::vector<double> row(var.cardinality(), 0.0);
                if (const auto* hard = std::get_if<HardDo>(&active->action)) {
                    row[init.state_of(var.name, hard->state)] = 1.0;
                } else {
                    row = std::get<PriorDo>(active->action).prior;
                }
                factors.push_back(table({n + i}, {row}));
            } else if (t == 1) {
                const Cpt& c = *init.cpt(i);
                std::vector<std::size_t> scope;
                for (const auto& p : c.parents) scope.push_back(n + init.index_of(p));
                scope.push_back(n + i);
                factors.push_back(table(scope, c.rows));
            } else {
                const auto& c = dbn.transition(var.name);
                std::vector<std::size_t> scope;
                for (const auto& p : c.parents) {
                    const auto pid = init.index_of(p.name);
                    scope.push_back(p.lag == Lag::Current ? n + pid : pid);
                }
                scope.push_back(n + i);
                factors.push_back(table(scope, c.rows));
            }
        }

        std::vector<Marginal> slice;
        for (auto w : wanted) {
            const std::size_t keep[] = {n + w};
            Factor f = eliminate(factors, keep, names);
            f.normalize();
            slice.push_back({init.variable(w).name, init.variable(w).states, f.values()});
        }
        out.push_back(std::move(slice));

        if (t < horizon && !interface_ids.empty()) {
            std::vector<std::size_t> keep;
            for (auto i : interface_ids) keep.push_back(n + i);
            Factor next = eliminate(std::move(factors), keep, names);
            next.normalize();
            std::vector<std::size_t> fc;
            for (auto i : interface_ids) fc.push_back(cards[i]);
            belief = Factor(interface_ids, std::move(fc), next.values());
        }
    }
    return out;
}

std::optional<int> steady_state_check(std::span<const double> utilities, double tolerance) {
    const auto n = utilities.size();
    if (n == 0) throw DomainError("steady-state check needs a non-empty timeline");
    if (n == 1) return 1;
    // Walk back from the end while successive changes stay below tolerance.
    std::size_t first = n - 1;
    while (first > 0 && std::abs(utilities[first] - utilities[first - 1]) < tolerance) --first;
    if (first == n - 1) return std::nullopt;
    return static_cast<int>(first) + 1;
}

std::optional<int> steady_state_check(const UtilityTimeline& timeline, double tolerance) {
    const auto u = timeline.utilities();
    return steady_state_check(std::span<const double>(u), tolerance);
}

}  // namespace polinfer
