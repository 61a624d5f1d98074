#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "polinfer/analytics.hpp"
#include "polinfer/interventions.hpp"
#include "polinfer/pollinator.hpp"
#include "polinfer/temporal.hpp"
#include "polinfer/timeline.hpp"

namespace polinfer {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Rows whose sum is off by more than this are rescaled on load...
inline constexpr double kRenormaliseAbove = 1e-12;
/// ...and rows off by more than this are rejected.
inline constexpr double kRowSumTolerance = 1e-6;

struct ModelDocument {
    std::string name;
    TwoSliceDBN dbn;
    /// Free-form object: provenance notes, fit report.
    Json metadata = Json::object();

    friend bool operator==(const ModelDocument&, const ModelDocument&) = default;
};

Json model_to_json(const ModelDocument& doc);
/// Throws ParseError naming the offending field (JSON-pointer style) for
/// malformed input, unknown fields, schema mismatches or invalid networks.
ModelDocument model_from_json(const Json& j);

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string canonical_text(const Json& j);
/// Hex SHA-256 of the compact canonical form of the model document.
std::string model_hash(const ModelDocument& doc);
std::string sha256_hex(std::string_view bytes);

/// Parse errors carry line and column.
Json parse_json_text(std::string_view text, std::string_view origin);
ModelDocument load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ModelDocument& doc);

/// Model document of a calibrated pollinator model with provenance and fit report.
ModelDocument export_model(const pollinator::CalibratedModel& model);
Json fit_report_to_json(const pollinator::FitReport& report);

struct ScenarioDocument {
    Scenario scenario;
    int horizon = 10;
    /// Either a named utility ("abundance") or "inline".
    std::string utility_ref = "abundance";
    UtilitySpec utility = pollinator::abundance_utility();

    friend bool operator==(const ScenarioDocument&, const ScenarioDocument&) = default;
};

Json scenario_to_json(const ScenarioDocument& doc);
ScenarioDocument scenario_from_json(const Json& j);
ScenarioDocument load_scenario(const std::filesystem::path& path);

/**
 * Checks a scenario document against a model. Unknown targets or states and
 * windows outside [1, horizon] raise ParseError naming the field; prior
 * replacement on a variable with parents raises SemanticsError and
 * overlapping interventions on one variable raise ConflictError.
 */
void check_scenario_document(const ScenarioDocument& doc, const TwoSliceDBN& dbn);

/// slice, p_<group>_good..., utility. Numbers in shortest round-trip form.
std::string timeline_csv(const UtilityTimeline& timeline, const UtilitySpec& spec);
/// slice, <group>..., total: per-target w_i * p_i * scale.
std::string contributions_csv(const UtilityTimeline& timeline, const UtilitySpec& spec);
/// variable, mutual_information, percentage_of_entropy, variance_of_belief.
std::string sensitivity_csv(const SensitivityReport& report);

Json timeline_to_json(const UtilityTimeline& timeline, const UtilitySpec& spec);
UtilityTimeline timeline_from_json(const Json& j);
Json sensitivity_to_json(const SensitivityReport& report);

/// CSV column stem for a utility target: "HoneybeeAbundance" -> "honeybee".
std::string column_stem(std::string_view variable);
/// Shortest decimal that reads back to the same double.
std::string format_number(double value);

/// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace polinfer
