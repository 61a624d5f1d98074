#include "polinfer/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>

#include "polinfer/errors.hpp"

namespace polinfer {

std::optional<std::size_t> Variable::state_index(std::string_view label) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == label) return i;
    }
    return std::nullopt;
}

std::string_view to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::Cycle: return "cycle";
        case Violation::Kind::MissingCpt: return "missing-cpt";
        case Violation::Kind::ParentMismatch: return "parent-mismatch";
        case Violation::Kind::RowCount: return "row-count";
        case Violation::Kind::RowWidth: return "row-width";
        case Violation::Kind::OutOfRange: return "out-of-range";
        case Violation::Kind::NotNormalised: return "not-normalised";
    }
    return "unknown";
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        out << to_string(v.kind) << " [";
        for (std::size_t i = 0; i < v.nodes.size(); ++i) out << (i ? "," : "") << v.nodes[i];
        out << "]";
        if (v.row) out << " row " << *v.row;
        out << ": " << v.message << '\n';
    }
    return out.str();
}

std::size_t DiscreteNetwork::add_variable(Variable variable) {
    if (variable.name.empty()) throw DomainError("variable name must not be empty");
    if (index_.contains(variable.name)) throw DomainError("duplicate variable '" + variable.name + "'");
    if (variable.states.size() < 2) {
        throw DomainError("variable '" + variable.name + "' needs at least two states");
    }
    std::set<std::string> seen;
    for (const auto& s : variable.states) {
        if (!seen.insert(s).second) {
            throw DomainError("variable '" + variable.name + "' repeats state '" + s + "'");
        }
    }
    const std::size_t id = variables_.size();
    index_.emplace(variable.name, id);
    variables_.push_back(std::move(variable));
    cpts_.emplace_back();
    parents_.emplace_back();
    children_.emplace_back();
    return id;
}

void DiscreteNetwork::add_edge(std::string_view from, std::string_view to) {
    const auto a = index_of(from);
    const auto b = index_of(to);
    auto& ps = parents_[b];
    if (std::find(ps.begin(), ps.end(), a) != ps.end()) return;
    ps.push_back(a);
    children_[a].push_back(b);
}

void DiscreteNetwork::set_cpt(Cpt cpt) {
    const auto id = index_of(cpt.child);
    cpts_[id] = std::move(cpt);
}

void DiscreteNetwork::replace_mechanism(Cpt cpt) {
    const auto id = index_of(cpt.child);
    std::vector<std::size_t> new_parents;
    for (const auto& p : cpt.parents) new_parents.push_back(index_of(p));
    for (auto old : parents_[id]) {
        auto& ch = children_[old];
        ch.erase(std::remove(ch.begin(), ch.end(), id), ch.end());
    }
    parents_[id].clear();
    for (auto p : new_parents) {
        parents_[id].push_back(p);
        children_[p].push_back(id);
    }
    cpts_[id] = std::move(cpt);
}

std::optional<std::size_t> DiscreteNetwork::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t DiscreteNetwork::index_of(std::string_view name) const {
    auto id = find(name);
    if (!id) throw LookupError("unknown variable '" + std::string(name) + "'");
    return *id;
}

std::size_t DiscreteNetwork::state_of(std::string_view name, std::string_view label) const {
    const auto& v = variable(name);
    auto s = v.state_index(label);
    if (!s) {
        throw LookupError("variable '" + v.name + "' has no state '" + std::string(label) + "'");
    }
    return *s;
}

std::vector<Edge> DiscreteNetwork::edges() const {
    std::vector<Edge> out;
    for (std::size_t c = 0; c < size(); ++c) {
        for (auto p : parents_[c]) out.push_back({variables_[p].name, variables_[c].name});
    }
    std::sort(out.begin(), out.end());
    return out;
}

const Cpt* DiscreteNetwork::cpt(std::size_t index) const {
    const auto& c = cpts_.at(index);
    return c ? &*c : nullptr;
}

bool operator==(const DiscreteNetwork& a, const DiscreteNetwork& b) {
    return a.variables_ == b.variables_ && a.cpts_ == b.cpts_ && a.edges() == b.edges();
}

std::size_t cpt_row_index(const DiscreteNetwork& net, const Cpt& cpt,
                          std::span<const std::size_t> parent_states) {
    std::size_t row = 0;
    for (std::size_t i = 0; i < cpt.parents.size(); ++i) {
        row = row * net.variable(cpt.parents[i]).cardinality() + parent_states[i];
    }
    return row;
}

namespace {

// Nodes on some directed cycle, grouped per strongly connected component (Tarjan).
std::vector<std::vector<std::size_t>> cyclic_components(const DiscreteNetwork& net) {
    const std::size_t n = net.size();
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> out;
    int counter = 0;

    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (auto w : net.children(v)) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::size_t> comp;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp.push_back(w);
            } while (w != v);
            const auto& ch = net.children(v);
            const bool self_loop = std::find(ch.begin(), ch.end(), v) != ch.end();
            if (comp.size() > 1 || self_loop) out.push_back(std::move(comp));
        }
    };
    for (std::size_t v = 0; v < n; ++v) {
        if (index[v] < 0) visit(v);
    }
    return out;
}

}  // namespace

ValidationReport validate(const DiscreteNetwork& net, double tolerance) {
    ValidationReport report;
    for (auto& comp : cyclic_components(net)) {
        std::vector<std::string> names;
        for (auto v : comp) names.push_back(net.variable(v).name);
        std::sort(names.begin(), names.end());
        report.violations.push_back({Violation::Kind::Cycle, names, std::nullopt,
                                     "directed cycle through these nodes"});
    }

    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto& var = net.variable(i);
        const Cpt* cpt = net.cpt(i);
        if (!cpt) {
            report.violations.push_back({Violation::Kind::MissingCpt, {var.name}, std::nullopt,
                                         "no conditional probability table"});
            continue;
        }

        std::set<std::size_t> declared;
        bool known = true;
        for (const auto& p : cpt->parents) {
            auto id = net.find(p);
            if (!id) {
                known = false;
                continue;
            }
            declared.insert(*id);
        }
        const std::set<std::size_t> graph(net.parents(i).begin(), net.parents(i).end());
        if (!known || declared != graph || declared.size() != cpt->parents.size()) {
            report.violations.push_back({Violation::Kind::ParentMismatch, {var.name}, std::nullopt,
                                         "CPT parent list does not match graph parents"});
            continue;
        }

        std::size_t expected_rows = 1;
        for (const auto& p : cpt->parents) expected_rows *= net.variable(p).cardinality();
        if (cpt->rows.size() != expected_rows) {
            report.violations.push_back(
                {Violation::Kind::RowCount, {var.name}, std::nullopt,
                 "expected " + std::to_string(expected_rows) + " rows, found " +
                     std::to_string(cpt->rows.size())});
        }
        for (std::size_t r = 0; r < cpt->rows.size(); ++r) {
            const auto& row = cpt->rows[r];
            if (row.size() != var.cardinality()) {
                report.violations.push_back({Violation::Kind::RowWidth, {var.name}, r,
                                             "row width differs from state count"});
                continue;
            }
            double sum = 0.0;
            bool in_range = true;
            for (double p : row) {
                if (!(p >= 0.0 && p <= 1.0)) in_range = false;
                sum += p;
            }
            if (!in_range) {
                report.violations.push_back({Violation::Kind::OutOfRange, {var.name}, r,
                                             "probability outside [0,1]"});
            } else if (std::abs(sum - 1.0) > tolerance) {
                std::ostringstream msg;
                msg << "row sums to " << sum;
                report.violations.push_back({Violation::Kind::NotNormalised, {var.name}, r, msg.str()});
            }
        }
    }
    return report;
}

std::vector<std::string> topological_order(const DiscreteNetwork& net) {
    const std::size_t n = net.size();
    std::vector<std::size_t> pending(n);
    using Entry = std::pair<std::string, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        pending[i] = net.parents(i).size();
        if (pending[i] == 0) ready.emplace(net.variable(i).name, i);
    }
    std::vector<std::string> order;
    order.reserve(n);
    while (!ready.empty()) {
        auto [name, v] = ready.top();
        ready.pop();
        order.push_back(name);
        for (auto c : net.children(v)) {
            if (--pending[c] == 0) ready.emplace(net.variable(c).name, c);
        }
    }
    if (order.size() != n) throw StructuralError("network graph contains a cycle");
    return order;
}

std::set<std::size_t> ancestors(const DiscreteNetwork& net, std::span<const std::size_t> nodes) {
    std::set<std::size_t> seen;
    std::vector<std::size_t> stack(nodes.begin(), nodes.end());
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto p : net.parents(v)) {
            if (seen.insert(p).second) stack.push_back(p);
        }
    }
    return seen;
}

std::set<std::size_t> descendants(const DiscreteNetwork& net, std::size_t node) {
    std::set<std::size_t> seen;
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto c : net.children(v)) {
            if (seen.insert(c).second) stack.push_back(c);
        }
    }
    return seen;
}

// Reachability ("Bayes ball") over (node, direction) pairs.
bool d_separated(const DiscreteNetwork& net, std::string_view x, std::string_view y,
                 std::span<const std::string> given) {
    const auto source = net.index_of(x);
    const auto target = net.index_of(y);
    if (source == target) throw DomainError("d-separation needs two distinct variables");

    std::vector<bool> observed(net.size(), false);
    std::vector<std::size_t> observed_ids;
    for (const auto& g : given) {
        auto id = net.index_of(g);
        observed[id] = true;
        observed_ids.push_back(id);
    }
    if (observed[source] || observed[target]) {
        throw DomainError("d-separation endpoints must not be in the conditioning set");
    }

    // Nodes that are observed or have an observed descendant activate colliders.
    std::vector<bool> activates(net.size(), false);
    for (auto id : observed_ids) activates[id] = true;
    for (auto a : ancestors(net, observed_ids)) activates[a] = true;

    enum Dir { Up = 0, Down = 1 };  // Up: arrived from a child; Down: arrived from a parent.
    std::vector<std::array<bool, 2>> visited(net.size(), {false, false});
    std::vector<std::pair<std::size_t, Dir>> frontier{{source, Up}};
    while (!frontier.empty()) {
        auto [v, dir] = frontier.back();
        frontier.pop_back();
        if (visited[v][dir]) continue;
        visited[v][dir] = true;
        if (v == target) return false;

        if (dir == Up && !observed[v]) {
            for (auto p : net.parents(v)) frontier.emplace_back(p, Up);
            for (auto c : net.children(v)) frontier.emplace_back(c, Down);
        } else if (dir == Down) {
            if (!observed[v]) {
                for (auto c : net.children(v)) frontier.emplace_back(c, Down);
            }
            if (activates[v]) {
                for (auto p : net.parents(v)) frontier.emplace_back(p, Up);
            }
        }
    }
    return true;
}

}  // namespace polinfer
