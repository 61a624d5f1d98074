#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "polinfer/network.hpp"

namespace polinfer {

/**
 * Non-negative table over the cartesian product of a scope of variables.
 *
 * Variables are identified by index (into a DiscreteNetwork or any other
 * numbering the caller chooses). Storage is row-major: the last scope
 * variable varies fastest, which matches the CPT row layout with the child
 * placed last.
 */
class Factor {
public:
    /// Scalar factor with value 1.
    Factor() : values_{1.0} {}
    Factor(std::vector<std::size_t> scope, std::vector<std::size_t> cardinalities,
           std::vector<double> values);

    const std::vector<std::size_t>& scope() const noexcept { return scope_; }
    const std::vector<std::size_t>& cardinalities() const noexcept { return cards_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    bool contains(std::size_t var) const;
    /// Cardinality of `var` within this factor; throws LookupError if absent.
    std::size_t cardinality_of(std::size_t var) const;

    /// Value at a full assignment given in scope order.
    double at(std::span<const std::size_t> assignment) const;

    Factor product(const Factor& other) const;
    Factor sum_out(std::size_t var) const;
    Factor reduce(std::size_t var, std::size_t state) const;
    /// Same table with the scope reordered to `order` (a permutation of scope()).
    Factor permuted(std::span<const std::size_t> order) const;
    /// Marginal over a subset of the scope, in the given order.
    Factor marginal(std::span<const std::size_t> keep) const;

    double sum() const;
    /// Divides by the total mass; returns the mass that was divided out.
    double normalize();

private:
    std::vector<std::size_t> scope_;
    std::vector<std::size_t> cards_;
    std::vector<double> values_;
};

/// CPT of variable `index` as a factor with scope (cpt parents..., child).
Factor cpt_factor(const DiscreteNetwork& net, std::size_t index);

}  // namespace polinfer
