#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polinfer/analytics.hpp"
#include "polinfer/inference.hpp"
#include "polinfer/interventions.hpp"
#include "polinfer/temporal.hpp"

namespace polinfer {

struct SliceRecord {
    int slice = 0;
    /// P(target_i = good_i), in utility-spec order.
    std::vector<double> good_probabilities;
    /// w_i * p_i * scale, in utility-spec order.
    std::vector<double> contributions;
    double utility = 0.0;
    /// Marginals of every slice variable, in declaration order.
    std::vector<Marginal> marginals;
};

struct UtilityTimeline {
    std::string scenario;
    std::vector<SliceRecord> records;

    std::vector<double> utilities() const;
};

/**
 * Evaluates a scenario over `horizon` slices: checks it, unrolls the DBN,
 * applies the interventions slice by slice and queries every slice variable
 * on the unrolled network. Outside its window an intervention is absent, so
 * any reversion after a policy ends comes from the temporal dynamics alone.
 */
UtilityTimeline run_scenario(const TwoSliceDBN& dbn, const Scenario& scenario, int horizon,
                             const UtilitySpec& spec);

/**
 * Per-slice marginals of `variables` computed by exact slice-wise filtering:
 * the joint over the variables with temporal children is carried forward and
 * every other variable is eliminated within its slice. Agrees with querying
 * the unrolled network; much cheaper for long horizons. Result is indexed
 * [slice - 1][variable].
 */
std::vector<std::vector<Marginal>> filter_marginals(const TwoSliceDBN& dbn, const Scenario& scenario,
                                                    int horizon, std::span<const std::string> variables);

/// First slice from which every later successive utility change stays below
/// `tolerance`; nullopt when the series never settles before its last slice.
std::optional<int> steady_state_check(std::span<const double> utilities, double tolerance);
std::optional<int> steady_state_check(const UtilityTimeline& timeline, double tolerance);

}  // namespace polinfer
