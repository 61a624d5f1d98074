#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "polinfer/network.hpp"

namespace polinfer {

enum class Lag { Current, Previous };

/// Parent of a transition CPT: a variable in the same slice or in the previous one.
struct ParentRef {
    std::string name;
    Lag lag = Lag::Current;

    friend auto operator<=>(const ParentRef&, const ParentRef&) = default;
};

/// P(X_t | same-slice parents, previous-slice parents). Row layout as in Cpt.
struct TransitionCpt {
    std::string child;
    std::vector<ParentRef> parents;
    std::vector<std::vector<double>> rows;

    friend bool operator==(const TransitionCpt&, const TransitionCpt&) = default;
};

/**
 * Stationary first-order DBN: an initial network for slice 1 plus a transition
 * model for every later slice. Temporal edges run from a variable at t-1 to a
 * variable at t (self-loops allowed).
 */
struct TwoSliceDBN {
    DiscreteNetwork initial;
    std::vector<Edge> intra_edges;
    std::vector<Edge> temporal_edges;
    std::vector<TransitionCpt> transition_cpts;

    const TransitionCpt& transition(std::string_view child) const;
    bool has_temporal_parents(std::string_view child) const;

    friend bool operator==(const TwoSliceDBN&, const TwoSliceDBN&) = default;
};

ValidationReport validate(const TwoSliceDBN& dbn, double tolerance = 1e-9);

/// Slice-indexed node naming used by unrolled networks: "Weather[3]".
std::string slice_name(std::string_view variable, int slice);

struct UnrolledNetwork {
    int horizon = 0;
    /// Variables of one slice, in the initial network's declaration order.
    std::vector<std::string> slice_variables;
    DiscreteNetwork net;

    const std::string& variable_at(std::size_t i) const { return slice_variables.at(i); }
};

/**
 * Copies the slice model T times. Slice 1 uses the initial network for every
 * variable (temporal parents have no slice 0 to refer to); slices 2..T use the
 * transition CPTs. Throws StructuralError for an invalid DBN and DomainError
 * for T < 1.
 */
UnrolledNetwork unroll(const TwoSliceDBN& dbn, int horizon);

}  // namespace polinfer
