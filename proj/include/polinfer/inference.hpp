#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polinfer/factor.hpp"
#include "polinfer/network.hpp"

namespace polinfer {

/// Observed states keyed by variable name. A map, so each variable appears at most once.
using Evidence = std::map<std::string, std::string>;

struct Marginal {
    std::string variable;
    std::vector<std::string> states;
    std::vector<double> distribution;

    /// Throws LookupError for unknown labels.
    double probability(std::string_view state) const;
};

enum class TieBreak { Lexicographic, ReverseLexicographic };

struct QueryOptions {
    /// Order among equal min-fill candidates. Results do not depend on it beyond rounding.
    TieBreak tie_break = TieBreak::Lexicographic;
};

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 20;

/**
 * Exact P(target | evidence) by variable elimination.
 *
 * Nodes that are neither query/evidence variables nor their ancestors are
 * pruned first (they sum to one). The elimination order is greedy min-fill
 * with name-ordered tie-break.
 */
Marginal posterior_marginal(const DiscreteNetwork& net, std::string_view target,
                            const Evidence& evidence = {}, const QueryOptions& options = {});

/// Normalised joint over `targets` (scope in the given order, indices into `net`).
Factor joint_query(const DiscreteNetwork& net, std::span<const std::string> targets,
                   const Evidence& evidence = {}, const QueryOptions& options = {});

/// Brute-force reference: sums the chain-rule product over every full assignment.
Marginal enumeration_oracle(const DiscreteNetwork& net, std::string_view target,
                            const Evidence& evidence = {},
                            std::size_t cap = kDefaultEnumerationCap);

/// Joint counterpart of `enumeration_oracle`.
Factor enumeration_joint(const DiscreteNetwork& net, std::span<const std::string> targets,
                         const Evidence& evidence = {}, std::size_t cap = kDefaultEnumerationCap);

/**
 * Sums every variable outside `keep` out of the product of `factors`.
 *
 * `names[v]` orders ties in the min-fill heuristic. The result is unnormalised
 * and has scope `keep` in the given order. Exposed for callers that assemble
 * their own factor sets (slice-wise filtering, tests).
 */
Factor eliminate(std::vector<Factor> factors, std::span<const std::size_t> keep,
                 std::span<const std::string> names, TieBreak tie_break = TieBreak::Lexicographic);

}  // namespace polinfer
