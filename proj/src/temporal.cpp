#include "polinfer/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "polinfer/errors.hpp"

namespace polinfer {

const TransitionCpt& TwoSliceDBN::transition(std::string_view child) const {
    for (const auto& t : transition_cpts) {
        if (t.child == child) return t;
    }
    throw LookupError("no transition CPT for '" + std::string(child) + "'");
}

bool TwoSliceDBN::has_temporal_parents(std::string_view child) const {
    return std::any_of(temporal_edges.begin(), temporal_edges.end(),
                       [&](const Edge& e) { return e.to == child; });
}

std::string slice_name(std::string_view variable, int slice) {
    return std::string(variable) + "[" + std::to_string(slice) + "]";
}

ValidationReport validate(const TwoSliceDBN& dbn, double tolerance) {
    ValidationReport report = validate(dbn.initial, tolerance);
    const auto& init = dbn.initial;

    auto violation = [&](Violation::Kind kind, std::vector<std::string> nodes, std::string msg,
                         std::optional<std::size_t> row = std::nullopt) {
        report.violations.push_back({kind, std::move(nodes), row, "transition: " + std::move(msg)});
    };

    // Intra-slice graph must be acyclic on its own.
    DiscreteNetwork slice;
    for (const auto& v : init.variables()) slice.add_variable(v);
    for (const auto& e : dbn.intra_edges) {
        if (!init.find(e.from) || !init.find(e.to)) {
            violation(Violation::Kind::ParentMismatch, {e.from, e.to}, "intra edge names unknown variable");
            continue;
        }
        slice.add_edge(e.from, e.to);
    }
    for (const auto& e : dbn.temporal_edges) {
        if (!init.find(e.from) || !init.find(e.to)) {
            violation(Violation::Kind::ParentMismatch, {e.from, e.to},
                      "temporal edge names unknown variable");
        }
    }
    try {
        topological_order(slice);
    } catch (const StructuralError&) {
        violation(Violation::Kind::Cycle, {}, "intra-slice edges contain a cycle");
    }

    std::set<std::string> seen;
    for (const auto& t : dbn.transition_cpts) {
        if (!init.find(t.child)) {
            violation(Violation::Kind::ParentMismatch, {t.child}, "CPT for unknown variable");
            continue;
        }
        if (!seen.insert(t.child).second) {
            violation(Violation::Kind::ParentMismatch, {t.child}, "duplicate transition CPT");
            continue;
        }
        std::set<ParentRef> expected;
        for (const auto& e : dbn.intra_edges) {
            if (e.to == t.child) expected.insert({e.from, Lag::Current});
        }
        for (const auto& e : dbn.temporal_edges) {
            if (e.to == t.child) expected.insert({e.from, Lag::Previous});
        }
        const std::set<ParentRef> declared(t.parents.begin(), t.parents.end());
        if (declared != expected || declared.size() != t.parents.size()) {
            violation(Violation::Kind::ParentMismatch, {t.child},
                      "parents do not match intra and temporal edges");
            continue;
        }
        std::size_t rows = 1;
        for (const auto& p : t.parents) rows *= init.variable(p.name).cardinality();
        if (t.rows.size() != rows) {
            violation(Violation::Kind::RowCount, {t.child},
                      "expected " + std::to_string(rows) + " rows, found " + std::to_string(t.rows.size()));
        }
        const auto width = init.variable(t.child).cardinality();
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            double sum = 0.0;
            bool in_range = t.rows[r].size() == width;
            for (double p : t.rows[r]) {
                in_range = in_range && p >= 0.0 && p <= 1.0;
                sum += p;
            }
            if (!in_range) {
                violation(Violation::Kind::OutOfRange, {t.child}, "row malformed or outside [0,1]", r);
            } else if (std::abs(sum - 1.0) > tolerance) {
                violation(Violation::Kind::NotNormalised, {t.child}, "row does not sum to 1", r);
            }
        }
    }
    for (const auto& v : init.variables()) {
        if (!seen.contains(v.name)) {
            violation(Violation::Kind::MissingCpt, {v.name}, "no transition CPT");
        }
    }
    return report;
}

UnrolledNetwork unroll(const TwoSliceDBN& dbn, int horizon) {
    if (horizon < 1) throw DomainError("horizon must be at least 1");
    const auto report = validate(dbn);
    if (!report.ok()) throw StructuralError("invalid DBN:\n" + report.summary());

    UnrolledNetwork out;
    out.horizon = horizon;
    const auto& init = dbn.initial;
    for (const auto& v : init.variables()) out.slice_variables.push_back(v.name);

    for (int t = 1; t <= horizon; ++t) {
        for (const auto& v : init.variables()) {
            out.net.add_variable(Variable{slice_name(v.name, t), v.states});
        }
    }
    for (std::size_t i = 0; i < init.size(); ++i) {
        const Cpt& c = *init.cpt(i);
        Cpt renamed{slice_name(c.child, 1), {}, c.rows};
        for (const auto& p : c.parents) renamed.parents.push_back(slice_name(p, 1));
        out.net.replace_mechanism(std::move(renamed));
    }
    for (int t = 2; t <= horizon; ++t) {
        for (const auto& tc : dbn.transition_cpts) {
            Cpt c{slice_name(tc.child, t), {}, tc.rows};
            for (const auto& p : tc.parents) {
                c.parents.push_back(slice_name(p.name, p.lag == Lag::Current ? t : t - 1));
            }
            out.net.replace_mechanism(std::move(c));
        }
    }
    return out;
}

}  // namespace polinfer
