#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "polinfer/network.hpp"
#include "polinfer/temporal.hpp"

namespace polinfer {

/// Fix a variable to one state and cut it loose from its parents.
struct HardDo {
    std::string variable;
    std::string state;

    friend bool operator==(const HardDo&, const HardDo&) = default;
};

/// Replace the prior of a parentless variable.
struct PriorDo {
    std::string variable;
    std::vector<double> prior;

    friend bool operator==(const PriorDo&, const PriorDo&) = default;
};

/// Inclusive range of 1-based slices.
struct SliceWindow {
    int first = 1;
    int last = 1;

    bool contains(int slice) const noexcept { return first <= slice && slice <= last; }
    bool overlaps(const SliceWindow& other) const noexcept {
        return first <= other.last && other.first <= last;
    }

    friend bool operator==(const SliceWindow&, const SliceWindow&) = default;
};

struct Intervention {
    std::variant<HardDo, PriorDo> action;
    SliceWindow window;

    const std::string& target() const;

    friend bool operator==(const Intervention&, const Intervention&) = default;
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<Intervention> interventions;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/**
 * do(X = state): X's CPT becomes a point mass and its incoming edges are
 * removed, so ancestors of X keep their pre-intervention distribution.
 * Throws LookupError for unknown variables or states.
 */
DiscreteNetwork apply_hard_do(const DiscreteNetwork& net, std::string_view variable,
                              std::string_view state);

/// do(P(X) = prior) for a root X. Throws SemanticsError when X has parents and
/// DomainError when the prior is not a distribution over X's states.
DiscreteNetwork apply_prior_do(const DiscreteNetwork& net, std::string_view variable,
                               std::span<const double> prior);

/**
 * Checks a scenario against a slice model and horizon: known variables and
 * states, windows inside [1, horizon], prior-do only on variables without
 * intra-slice or temporal parents, and no two interventions on one variable
 * with overlapping windows.
 */
void check_scenario(const Scenario& scenario, const TwoSliceDBN& dbn, int horizon);

/// Applies every intervention at every slice of its window. Slices outside a
/// window keep the original mechanism.
UnrolledNetwork compose(const Scenario& scenario, const UnrolledNetwork& unrolled);

}  // namespace polinfer
