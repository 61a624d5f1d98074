#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polinfer/factor.hpp"
#include "polinfer/inference.hpp"
#include "polinfer/network.hpp"

namespace polinfer {

struct UtilityTarget {
    std::string variable;
    std::string good_state;
    double weight = 0.0;

    friend bool operator==(const UtilityTarget&, const UtilityTarget&) = default;
};

/**
 * Linear:      scale * sum_i w_i p_i
 * Exponential: scale * (1 - exp(-risk * sum_i w_i p_i))
 * where p_i = P(target_i = good_i). Weights are non-negative and sum to 1.
 */
struct UtilitySpec {
    enum class Kind { Linear, Exponential };

    Kind kind = Kind::Linear;
    std::vector<UtilityTarget> targets;
    double scale = 100.0;
    double risk = 1.0;

    /// Equal weights over the given (variable, good state) pairs.
    static UtilitySpec equal_weights(std::vector<std::pair<std::string, std::string>> targets,
                                     double scale = 100.0);

    /// Throws DomainError when weights, scale or risk coefficient are out of range.
    void check() const;

    friend bool operator==(const UtilitySpec&, const UtilitySpec&) = default;
};

/// Looks up each target's marginal by variable name. Throws LookupError if one is missing.
double utility(std::span<const Marginal> marginals, const UtilitySpec& spec);

/// Per-target share of a linear utility: w_i * p_i * scale.
std::vector<double> utility_contributions(std::span<const Marginal> marginals, const UtilitySpec& spec);

/// Shannon entropy in bits, with 0 log 0 = 0.
double entropy(std::span<const double> distribution);
inline double entropy(const Marginal& m) { return entropy(m.distribution); }

struct MutualInformation {
    double bits = 0.0;
    /// 100 * I(X;Y) / H(X); zero when H(X) == 0 (see `degenerate`).
    double percent_of_entropy = 0.0;
    bool degenerate = false;
};

/// From a normalised joint with scope (x, y).
MutualInformation mutual_information(const Factor& joint_xy);
double variance_of_belief(const Factor& joint_xy);

MutualInformation mutual_information(const DiscreteNetwork& net, std::string_view x,
                                     std::string_view y);
/// S^2 = sum_{x,y} p(x,y) (p(x|y) - p(x))^2: expected squared shift in beliefs about x.
double variance_of_belief(const DiscreteNetwork& net, std::string_view x, std::string_view y);

struct SensitivityRow {
    std::string source;
    double mutual_information = 0.0;
    double percent_of_entropy = 0.0;
    double variance_of_belief = 0.0;
};

struct SensitivityReport {
    std::string target;
    std::vector<SensitivityRow> rows;
};

/// Candidates ranked by mutual information with `target` (descending, ties by name), top_k kept.
SensitivityReport sensitivity_ranking(const DiscreteNetwork& net, std::string_view target,
                                      std::span<const std::string> candidates, std::size_t top_k);

}  // namespace polinfer
