#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "polinfer/documents.hpp"

namespace polinfer {

/// One persisted evaluation. Immutable once written.
struct RunRecord {
    /// Content hash of (model hash, scenario document).
    std::string id;
    std::string model_hash;
    ScenarioDocument scenario;
    UtilityTimeline timeline;
    /// UTC, ISO 8601.
    std::string created_at;
};

Json run_to_json(const RunRecord& record);
RunRecord run_from_json(const Json& j);

/// Stable id of a run: the first 32 hex digits of SHA-256 over the model hash
/// and the canonical scenario document.
std::string run_id(const std::string& model_hash, const ScenarioDocument& scenario);

/// Evaluates a checked scenario document on a model.
UtilityTimeline evaluate(const TwoSliceDBN& dbn, const ScenarioDocument& doc);

/**
 * Append-only directory of run records, one `<id>.json` file each. Writes go
 * through a single lock; a second put with an existing id returns the stored
 * record untouched.
 */
class RunStore {
public:
    explicit RunStore(std::filesystem::path directory);

    const std::filesystem::path& directory() const noexcept { return dir_; }

    /// Stores `record` unless its id exists. Returns the record now on disk.
    RunRecord put(RunRecord record);
    std::optional<RunRecord> get(const std::string& id) const;
    /// All records, oldest first (ties by id).
    std::vector<RunRecord> list() const;

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

std::string utc_timestamp();

}  // namespace polinfer
