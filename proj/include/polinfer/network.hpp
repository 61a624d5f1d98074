#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace polinfer {

/// A categorical random variable. State order is significant: index 0 is the
/// first listed state everywhere (CPT columns, evidence, marginals).
struct Variable {
    std::string name;
    std::vector<std::string> states;

    std::size_t cardinality() const noexcept { return states.size(); }
    std::optional<std::size_t> state_index(std::string_view label) const;

    friend bool operator==(const Variable&, const Variable&) = default;
};

struct Edge {
    std::string from;
    std::string to;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/**
 * Conditional probability table P(child | parents).
 *
 * `rows` enumerates the parent configurations in mixed-radix order with the
 * first parent varying slowest; each row is a distribution over the child's
 * states. A parentless CPT has exactly one row.
 */
struct Cpt {
    std::string child;
    std::vector<std::string> parents;
    std::vector<std::vector<double>> rows;

    friend bool operator==(const Cpt&, const Cpt&) = default;
};

struct Violation {
    enum class Kind {
        Cycle,
        MissingCpt,
        ParentMismatch,
        RowCount,
        RowWidth,
        OutOfRange,
        NotNormalised,
    };

    Kind kind;
    std::vector<std::string> nodes;
    std::optional<std::size_t> row;
    std::string message;
};

std::string_view to_string(Violation::Kind kind);

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::string summary() const;
};

/**
 * Directed acyclic graph over named categorical variables with one CPT per
 * node. Construction is permissive (cycles and missing rows are representable
 * so that `validate` can report them); inference entry points require a valid
 * network. Once built, instances are treated as immutable values and may be
 * shared across threads for read-only use.
 */
class DiscreteNetwork {
public:
    /// Throws DomainError on duplicate names, duplicate labels or fewer than two states.
    std::size_t add_variable(Variable variable);

    /// Throws LookupError on unknown endpoints; duplicate edges are ignored.
    void add_edge(std::string_view from, std::string_view to);

    /// Installs a CPT for an existing variable. Does not touch the graph.
    void set_cpt(Cpt cpt);

    /// Installs a CPT and rewires the child's incoming edges to exactly the CPT's parents.
    void replace_mechanism(Cpt cpt);

    std::size_t size() const noexcept { return variables_.size(); }
    const std::vector<Variable>& variables() const noexcept { return variables_; }
    const Variable& variable(std::size_t index) const { return variables_.at(index); }
    const Variable& variable(std::string_view name) const { return variables_[index_of(name)]; }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws LookupError for unknown names.
    std::size_t index_of(std::string_view name) const;
    /// Throws LookupError for unknown variables or labels.
    std::size_t state_of(std::string_view name, std::string_view label) const;

    const std::vector<std::size_t>& parents(std::size_t index) const { return parents_.at(index); }
    const std::vector<std::size_t>& children(std::size_t index) const { return children_.at(index); }
    bool is_root(std::size_t index) const { return parents_.at(index).empty(); }
    std::vector<Edge> edges() const;

    /// Null when no CPT has been installed yet.
    const Cpt* cpt(std::size_t index) const;
    const Cpt* cpt(std::string_view name) const { return cpt(index_of(name)); }

    friend bool operator==(const DiscreteNetwork& a, const DiscreteNetwork& b);

private:
    std::vector<Variable> variables_;
    std::vector<std::optional<Cpt>> cpts_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Row of `cpt` for the given parent states (one per CPT parent, in CPT order).
std::size_t cpt_row_index(const DiscreteNetwork& net, const Cpt& cpt,
                          std::span<const std::size_t> parent_states);

/// Every invariant violation; an empty report iff the network is valid.
ValidationReport validate(const DiscreteNetwork& net, double tolerance = 1e-9);

/// Parents before children; ready nodes are released in lexicographic name order.
/// Throws StructuralError when the graph has a cycle.
std::vector<std::string> topological_order(const DiscreteNetwork& net);

/// Strict ancestors/descendants of the given nodes (indices).
std::set<std::size_t> ancestors(const DiscreteNetwork& net, std::span<const std::size_t> nodes);
std::set<std::size_t> descendants(const DiscreteNetwork& net, std::size_t node);

/// Global directed Markov property check. Throws LookupError for unknown names and
/// DomainError if x == y or either endpoint is in `given`.
bool d_separated(const DiscreteNetwork& net, std::string_view x, std::string_view y,
                 std::span<const std::string> given);

}  // namespace polinfer
