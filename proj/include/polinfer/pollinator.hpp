#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polinfer/analytics.hpp"
#include "polinfer/interventions.hpp"
#include "polinfer/network.hpp"
#include "polinfer/temporal.hpp"

namespace polinfer::pollinator {

inline const std::string kWeather = "Weather";
inline const std::string kDisease = "DiseasePestPressure";
inline const std::string kPesticide = "PesticideUse";
inline const std::string kLandUse = "LandUseFragmentation";
inline const std::string kSocial = "SocialAttitudes";
inline const std::string kFood = "FoodSupply";
inline const std::string kEnvironment = "Environment";
inline const std::string kHoneybee = "HoneybeeAbundance";
inline const std::string kOtherBees = "OtherBeesAbundance";
inline const std::string kOtherPollinators = "OtherPollinatorsAbundance";

/// Variables, intra-slice edges and temporal edges of the panel model.
struct PanelSpec {
    std::vector<Variable> variables;
    std::vector<Edge> intra_edges;
    std::vector<Edge> temporal_edges;
};

PanelSpec build_structure();

/**
 * Entries stated exactly by the source material. Probabilities refer to the
 * first-listed state unless the name says otherwise.
 */
struct FixedParameters {
    std::array<double, 2> weather_prior{0.62, 0.38};
    /// P(Pesticide = High | Weather = Average, Unusual).
    std::array<double, 2> pesticide_high{0.75, 0.85};
    double land_use_low = 0.73;
    double social_supportive = 0.60;
    /// P(Environment = Supportive) indexed by how many of its parents are in
    /// their supportive state (Pesticide Low, Land use Low, Food Good).
    std::array<double, 4> environment_by_count{0.05, 0.2, 0.4, 0.8};
    /// Unusual weather raises P(Disease = High) by this much.
    double disease_weather_shift = 0.10;
    /// The previous slice's disease state is this much more likely to persist.
    double disease_persistence_shift = 0.10;
};

FixedParameters fixed_parameters();

/**
 * The CPT entries with no published value. Every entry is the probability of
 * the first-listed ("High" / "Good") state of the child.
 */
struct FreeParameters {
    /// P(Disease = High | Weather = Average) in the initial slice.
    double disease_high = 0.4;
    /// [social][weather]
    std::array<std::array<double, 2>, 2> food_good{};
    /// [environment][disease]
    std::array<std::array<double, 2>, 2> honeybee_initial{};
    /// [environment][disease][honeybee at t-1]
    std::array<std::array<std::array<double, 2>, 2>, 2> honeybee_transition{};
    /// [environment]
    std::array<double, 2> other_bees_initial{};
    /// [environment][other bees at t-1]
    std::array<std::array<double, 2>, 2> other_bees_transition{};
    std::array<double, 2> other_pollinators_initial{};
    std::array<std::array<double, 2>, 2> other_pollinators_transition{};

    static constexpr std::size_t kCount = 29;

    std::array<double, kCount> pack() const;
    static FreeParameters unpack(std::span<const double> values);
    /// Human-readable label per packed entry, e.g. "P(HoneybeeAbundance=Good | Environment=Supportive, ...)".
    static std::array<std::string, kCount> labels();
    /// Box constraints per packed entry.
    static std::array<std::pair<double, double>, kCount> bounds();
    static FreeParameters uniform(double value);

    friend bool operator==(const FreeParameters&, const FreeParameters&) = default;
};

/// Builds the complete slice model from the structure and both parameter sets.
TwoSliceDBN assemble(const PanelSpec& spec, const FixedParameters& fixed, const FreeParameters& free);

/// Equal-weight linear utility over P(Good) of the three abundance groups, scale 100.
UtilitySpec abundance_utility();

/// The no-change run and the seven policy scenarios, in presentation order:
/// baseline, 1a, 1b, 1c, 2, 3, 4, 5.
std::vector<Scenario> standard_scenarios();
const Scenario& standard_scenario(std::string_view name);

struct Anchor {
    enum class Kind {
        /// P(variable = state) at `slice` with no intervention.
        Marginal,
        /// P(variable = state) at `slice` under `scenario`.
        PostIntervention,
        /// Abundance utility at `slice` under `scenario`.
        Utility,
        /// I(variable; source) on the two-slice network, in bits.
        MutualInformation,
        /// 100 I / H(variable).
        EntropyPercent,
        /// S^2(variable; source).
        VarianceOfBelief,
    };

    Kind kind = Kind::Marginal;
    std::string scenario = "baseline";
    int slice = 1;
    std::string variable;
    std::string state;
    /// Conditioning node of a sensitivity anchor, as "Name[slice]".
    std::string source;
    double target = 0.0;
    double weight = 1.0;
    std::string citation;

    /// Marginal-type anchors are judged against the fit tolerance.
    bool is_marginal() const noexcept { return kind == Kind::Marginal || kind == Kind::PostIntervention; }
    std::string describe() const;
};

std::string_view to_string(Anchor::Kind kind);

using AnchorSet = std::vector<Anchor>;

/**
 * Everything published that pins the free entries: slice-1 marginals with and
 * without interventions, the ten-slice utility trajectories of all eight
 * scenarios, and the leading rows of the three sensitivity tables.
 */
AnchorSet published_anchors();

/// Achieved value of every anchor under `dbn`.
std::vector<double> evaluate_anchors(const TwoSliceDBN& dbn, const AnchorSet& anchors);

/// Signed residual in the units the loss uses: probability for marginals,
/// utility / 100 for utilities, relative error for sensitivity values.
double anchor_residual(const Anchor& anchor, double achieved);

struct AnchorResidual {
    Anchor anchor;
    double achieved = 0.0;
    double residual = 0.0;
};

struct FitReport {
    std::vector<AnchorResidual> residuals;
    double loss = 0.0;
    int iterations = 0;
    double tolerance = 0.01;
    /// Max |residual| over marginal anchors is within `tolerance`.
    bool success = false;
    /// Marginal anchors above tolerance, worst first.
    std::vector<std::string> failing_anchors;
    /// Free entries the anchors barely constrain.
    std::vector<std::string> weakly_identified;
    std::vector<std::string> notes;

    double max_marginal_residual() const;
};

struct CalibrationOptions {
    int max_iterations = 200;
    double tolerance = 0.01;
    /// Zero starts every free entry at 0.4; other seeds jitter the start.
    std::uint64_t seed = 0;
    std::optional<FreeParameters> start;
    /// Called after every accepted step with (iteration, loss).
    std::function<void(int, double)> progress;
};

struct CalibratedModel {
    TwoSliceDBN dbn;
    FreeParameters parameters;
    FitReport report;
};

/**
 * Weighted least squares over the free entries, box-constrained, solved by a
 * projected Levenberg-Marquardt iteration with a forward-difference Jacobian.
 * Deterministic for a given seed and start.
 */
CalibratedModel calibrate(const PanelSpec& spec, const FixedParameters& fixed, const AnchorSet& anchors,
                          const CalibrationOptions& options = {});

/// Residual report for given parameters without searching.
FitReport assess(const PanelSpec& spec, const FixedParameters& fixed, const FreeParameters& free,
                 const AnchorSet& anchors, double tolerance = 0.01);

/// Source note per CPT, used as model-document provenance.
std::vector<std::pair<std::string, std::string>> provenance();

}  // namespace polinfer::pollinator
