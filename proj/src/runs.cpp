#include "polinfer/runs.hpp"

#include <algorithm>
#include <ctime>

#include "polinfer/errors.hpp"

namespace polinfer {

Json run_to_json(const RunRecord& record) {
    return {{"id", record.id},
            {"model_hash", record.model_hash},
            {"scenario", scenario_to_json(record.scenario)},
            {"timeline", timeline_to_json(record.timeline, record.scenario.utility)},
            {"created_at", record.created_at}};
}

RunRecord run_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("expected an object", "/");
    for (const auto& [key, value] : j.items()) {
        if (key != "id" && key != "model_hash" && key != "scenario" && key != "timeline" && key != "created_at") {
            throw ParseError("unknown field", "/" + key);
        }
    }
    RunRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.model_hash = j.at("model_hash").get<std::string>();
        r.created_at = j.at("created_at").get<std::string>();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed run record: ") + e.what());
    }
    r.scenario = scenario_from_json(j.at("scenario"));
    r.timeline = timeline_from_json(j.at("timeline"));
    return r;
}

std::string run_id(const std::string& model_hash, const ScenarioDocument& scenario) {
    return sha256_hex(model_hash + "\n" + scenario_to_json(scenario).dump()).substr(0, 32);
}

UtilityTimeline evaluate(const TwoSliceDBN& dbn, const ScenarioDocument& doc) {
    check_scenario_document(doc, dbn);
    return run_scenario(dbn, doc.scenario, doc.horizon, doc.utility);
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunStore::RunStore(std::filesystem::path directory) : dir_(std::move(directory)) {
    std::filesystem::create_directories(dir_);
}

namespace {

bool valid_id(const std::string& id) {
    return !id.empty() && id.size() <= 64 &&
           std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

}  // namespace

RunRecord RunStore::put(RunRecord record) {
    if (!valid_id(record.id)) throw DomainError("run id must be lowercase hex");
    std::lock_guard lock(mutex_);
    const auto path = dir_ / (record.id + ".json");
    if (std::filesystem::exists(path)) {
        return run_from_json(parse_json_text(read_file(path), path.string()));
    }
    write_file_atomic(path, canonical_text(run_to_json(record)));
    return record;
}

std::optional<RunRecord> RunStore::get(const std::string& id) const {
    if (!valid_id(id)) return std::nullopt;
    std::lock_guard lock(mutex_);
    const auto path = dir_ / (id + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    return run_from_json(parse_json_text(read_file(path), path.string()));
}

std::vector<RunRecord> RunStore::list() const {
    std::lock_guard lock(mutex_);
    std::vector<RunRecord> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.path().extension() != ".json") continue;
        out.push_back(run_from_json(parse_json_text(read_file(entry.path()), entry.path().string())));
    }
    std::sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) {
        return a.created_at != b.created_at ? a.created_at < b.created_at : a.id < b.id;
    });
    return out;
}

}  // namespace polinfer
