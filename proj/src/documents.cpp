#include "polinfer/documents.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "polinfer/errors.hpp"

namespace polinfer {

namespace {

/// Strict view of one JSON object: rejects unknown keys up front and
/// reports every problem with its JSON-pointer location.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path, std::initializer_list<std::string_view> allowed)
        : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ParseError("expected an object", where());
        for (const auto& [key, value] : j.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                throw ParseError("unknown field", path_ + "/" + key);
            }
        }
    }

    std::string at(std::string_view key) const { return path_ + "/" + std::string(key); }
    std::string where() const { return path_.empty() ? "/" : path_; }

    bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    const Json& required(std::string_view key) const {
        const auto it = j_.find(std::string(key));
        if (it == j_.end()) throw ParseError("missing required field", at(key));
        return *it;
    }

    std::string string(std::string_view key) const {
        const auto& v = required(key);
        if (!v.is_string()) throw ParseError("expected a string", at(key));
        return v.get<std::string>();
    }

    int integer(std::string_view key) const {
        const auto& v = required(key);
        if (!v.is_number_integer()) throw ParseError("expected an integer", at(key));
        return v.get<int>();
    }

    double number(std::string_view key) const {
        const auto& v = required(key);
        if (!v.is_number()) throw ParseError("expected a number", at(key));
        return v.get<double>();
    }

    const Json& array(std::string_view key) const {
        const auto& v = required(key);
        if (!v.is_array()) throw ParseError("expected an array", at(key));
        return v;
    }

private:
    const Json& j_;
    std::string path_;
};

std::vector<std::string> string_list(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError("expected an array of strings", path);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) throw ParseError("expected a string", path + "/" + std::to_string(i));
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

std::vector<double> number_list(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError("expected an array of numbers", path);
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError("expected a number", path + "/" + std::to_string(i));
        out.push_back(j[i].get<double>());
    }
    return out;
}

std::vector<std::vector<double>> cpt_rows(const Json& j, const std::string& path, const std::string& child) {
    if (!j.is_array()) throw ParseError("expected an array of rows", path);
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string rp = path + "/" + std::to_string(r);
        auto row = number_list(j[r], rp);
        double sum = 0.0;
        for (double v : row) sum += v;
        if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
            throw ParseError("CPT row " + std::to_string(r) + " of '" + child + "' sums to " + format_number(sum), rp);
        }
        if (std::abs(sum - 1.0) > kRenormaliseAbove) {
            for (double& v : row) v /= sum;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string_view lag_name(Lag lag) { return lag == Lag::Current ? "current" : "previous"; }

Json rows_to_json(const std::vector<std::vector<double>>& rows) {
    Json out = Json::array();
    for (const auto& r : rows) out.push_back(r);
    return out;
}

}  // namespace

Json model_to_json(const ModelDocument& doc) {
    const auto& net = doc.dbn.initial;
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = doc.name;
    j["variables"] = Json::array();
    for (const auto& v : net.variables()) j["variables"].push_back({{"name", v.name}, {"states", v.states}});
    j["edges"] = Json::array();
    for (const auto& e : doc.dbn.intra_edges) j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"temporal", false}});
    for (const auto& e : doc.dbn.temporal_edges) j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"temporal", true}});
    j["initial_cpts"] = Json::array();
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Cpt* c = net.cpt(i);
        if (!c) throw StructuralError("variable '" + net.variable(i).name + "' has no CPT");
        j["initial_cpts"].push_back({{"child", c->child}, {"parents", c->parents}, {"rows", rows_to_json(c->rows)}});
    }
    j["transition_cpts"] = Json::array();
    for (const auto& t : doc.dbn.transition_cpts) {
        Json parents = Json::array();
        for (const auto& p : t.parents) parents.push_back({{"name", p.name}, {"lag", lag_name(p.lag)}});
        j["transition_cpts"].push_back({{"child", t.child}, {"parents", parents}, {"rows", rows_to_json(t.rows)}});
    }
    j["metadata"] = doc.metadata;
    return j;
}

ModelDocument model_from_json(const Json& j) {
    const ObjectReader root(j, "",
                            {"schema_version", "name", "variables", "edges", "initial_cpts", "transition_cpts",
                             "metadata"});
    if (root.integer("schema_version") != kSchemaVersion) {
        throw ParseError("unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")",
                         "/schema_version");
    }
    ModelDocument doc;
    doc.name = root.string("name");
    auto& dbn = doc.dbn;
    auto& net = dbn.initial;

    const auto& vars = root.array("variables");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const std::string path = "/variables/" + std::to_string(i);
        const ObjectReader v(vars[i], path, {"name", "states"});
        try {
            net.add_variable({v.string("name"), string_list(v.required("states"), v.at("states"))});
        } catch (const DomainError& e) {
            throw ParseError(e.what(), path);
        }
    }

    const auto& edges = root.array("edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string path = "/edges/" + std::to_string(i);
        const ObjectReader e(edges[i], path, {"from", "to", "temporal"});
        const Edge edge{e.string("from"), e.string("to")};
        const auto& temporal = e.required("temporal");
        if (!temporal.is_boolean()) throw ParseError("expected a boolean", e.at("temporal"));
        for (const auto& name : {edge.from, edge.to}) {
            if (!net.find(name)) throw ParseError("unknown variable '" + name + "'", path);
        }
        if (temporal.get<bool>()) {
            dbn.temporal_edges.push_back(edge);
        } else {
            net.add_edge(edge.from, edge.to);
            dbn.intra_edges.push_back(edge);
        }
    }

    const auto& initial = root.array("initial_cpts");
    for (std::size_t i = 0; i < initial.size(); ++i) {
        const std::string path = "/initial_cpts/" + std::to_string(i);
        const ObjectReader c(initial[i], path, {"child", "parents", "rows"});
        const auto child = c.string("child");
        if (!net.find(child)) throw ParseError("unknown variable '" + child + "'", c.at("child"));
        if (net.cpt(child)) throw ParseError("second CPT for '" + child + "'", path);
        net.set_cpt({child, string_list(c.required("parents"), c.at("parents")),
                     cpt_rows(c.required("rows"), c.at("rows"), child)});
    }

    const auto& transition = root.array("transition_cpts");
    for (std::size_t i = 0; i < transition.size(); ++i) {
        const std::string path = "/transition_cpts/" + std::to_string(i);
        const ObjectReader c(transition[i], path, {"child", "parents", "rows"});
        TransitionCpt t;
        t.child = c.string("child");
        const auto& parents = c.array("parents");
        for (std::size_t k = 0; k < parents.size(); ++k) {
            const ObjectReader p(parents[k], c.at("parents") + "/" + std::to_string(k), {"name", "lag"});
            const auto lag = p.string("lag");
            if (lag != "current" && lag != "previous") {
                throw ParseError("lag must be \"current\" or \"previous\"", p.at("lag"));
            }
            t.parents.push_back({p.string("name"), lag == "current" ? Lag::Current : Lag::Previous});
        }
        t.rows = cpt_rows(c.required("rows"), c.at("rows"), t.child);
        dbn.transition_cpts.push_back(std::move(t));
    }

    if (root.has("metadata")) {
        if (!j["metadata"].is_object()) throw ParseError("expected an object", "/metadata");
        doc.metadata = j["metadata"];
    }

    const auto report = validate(dbn);
    if (!report.ok()) {
        const auto& first = report.violations.front();
        std::string field = "/";
        if (!first.nodes.empty()) {
            const bool in_transition = first.message.rfind("transition", 0) == 0;
            const std::string& node = first.nodes.front();
            if (in_transition) {
                for (std::size_t i = 0; i < dbn.transition_cpts.size(); ++i) {
                    if (dbn.transition_cpts[i].child == node) field = "/transition_cpts/" + std::to_string(i);
                }
            } else {
                for (std::size_t i = 0; i < initial.size(); ++i) {
                    if (initial[i]["child"] == node) field = "/initial_cpts/" + std::to_string(i);
                }
            }
            if (field != "/" && first.row) field += "/rows/" + std::to_string(*first.row);
        }
        throw ParseError("model does not validate:\n" + report.summary(), field);
    }
    return doc;
}

std::string canonical_text(const Json& j) { return j.dump(2) + "\n"; }

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string model_hash(const ModelDocument& doc) { return sha256_hex(model_to_json(doc).dump()); }

Json parse_json_text(std::string_view text, std::string_view origin) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError(std::string(origin) + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         ": invalid JSON (" + e.what() + ")");
    }
}

ModelDocument load_model(const std::filesystem::path& path) {
    return model_from_json(parse_json_text(read_file(path), path.string()));
}

void save_model(const std::filesystem::path& path, const ModelDocument& doc) {
    write_file_atomic(path, canonical_text(model_to_json(doc)));
}

Json fit_report_to_json(const pollinator::FitReport& report) {
    Json residuals = Json::array();
    for (const auto& r : report.residuals) {
        const auto& a = r.anchor;
        Json row{{"kind", std::string(pollinator::to_string(a.kind))},
                 {"description", a.describe()},
                 {"scenario", a.scenario},
                 {"slice", a.slice},
                 {"target", a.target},
                 {"achieved", r.achieved},
                 {"residual", r.residual},
                 {"weight", a.weight},
                 {"citation", a.citation}};
        if (!a.variable.empty()) row["variable"] = a.variable;
        if (!a.state.empty()) row["state"] = a.state;
        if (!a.source.empty()) row["source"] = a.source;
        residuals.push_back(std::move(row));
    }
    return {{"success", report.success},
            {"tolerance", report.tolerance},
            {"loss", report.loss},
            {"iterations", report.iterations},
            {"max_marginal_residual", report.max_marginal_residual()},
            {"failing_anchors", report.failing_anchors},
            {"weakly_identified", report.weakly_identified},
            {"notes", report.notes},
            {"residuals", residuals}};
}

ModelDocument export_model(const pollinator::CalibratedModel& model) {
    ModelDocument doc;
    doc.name = "pollinator";
    doc.dbn = model.dbn;
    Json provenance = Json::object();
    for (const auto& [var, note] : pollinator::provenance()) provenance[var] = note;
    Json parameters = Json::object();
    const auto labels = pollinator::FreeParameters::labels();
    const auto values = model.parameters.pack();
    for (std::size_t i = 0; i < values.size(); ++i) parameters[labels[i]] = values[i];
    doc.metadata = {{"provenance", provenance},
                    {"calibrated_parameters", parameters},
                    {"fit_report", fit_report_to_json(model.report)}};
    return doc;
}

namespace {

Json utility_to_json(const UtilitySpec& spec) {
    Json targets = Json::array();
    for (const auto& t : spec.targets) {
        targets.push_back({{"variable", t.variable}, {"good", t.good_state}, {"weight", t.weight}});
    }
    Json j{{"kind", spec.kind == UtilitySpec::Kind::Linear ? "linear" : "exponential"},
           {"scale", spec.scale},
           {"targets", targets}};
    if (spec.kind == UtilitySpec::Kind::Exponential) j["risk"] = spec.risk;
    return j;
}

UtilitySpec utility_from_json(const Json& j, const std::string& path) {
    const ObjectReader r(j, path, {"kind", "scale", "risk", "targets"});
    UtilitySpec spec;
    const auto kind = r.string("kind");
    if (kind == "linear") {
        spec.kind = UtilitySpec::Kind::Linear;
    } else if (kind == "exponential") {
        spec.kind = UtilitySpec::Kind::Exponential;
        spec.risk = r.number("risk");
    } else {
        throw ParseError("kind must be \"linear\" or \"exponential\"", r.at("kind"));
    }
    if (spec.kind == UtilitySpec::Kind::Linear && r.has("risk")) {
        throw ParseError("risk applies to exponential utilities only", r.at("risk"));
    }
    spec.scale = r.has("scale") ? r.number("scale") : 100.0;
    const auto& targets = r.array("targets");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const ObjectReader t(targets[i], r.at("targets") + "/" + std::to_string(i), {"variable", "good", "weight"});
        spec.targets.push_back({t.string("variable"), t.string("good"), t.number("weight")});
    }
    try {
        spec.check();
    } catch (const DomainError& e) {
        throw ParseError(e.what(), path);
    }
    return spec;
}

}  // namespace

Json scenario_to_json(const ScenarioDocument& doc) {
    Json list = Json::array();
    for (const auto& iv : doc.scenario.interventions) {
        Json item{{"target", iv.target()}, {"window", {iv.window.first, iv.window.last}}};
        if (const auto* hard = std::get_if<HardDo>(&iv.action)) {
            item["kind"] = "fix";
            item["value"] = hard->state;
        } else {
            item["kind"] = "prior";
            item["value"] = std::get<PriorDo>(iv.action).prior;
        }
        list.push_back(std::move(item));
    }
    Json j{{"schema_version", kSchemaVersion},
           {"name", doc.scenario.name},
           {"description", doc.scenario.description},
           {"horizon", doc.horizon},
           {"interventions", list}};
    if (doc.utility_ref == "inline") {
        j["utility"] = utility_to_json(doc.utility);
    } else {
        j["utility"] = doc.utility_ref;
    }
    return j;
}

ScenarioDocument scenario_from_json(const Json& j) {
    const ObjectReader root(j, "", {"schema_version", "name", "description", "horizon", "interventions", "utility"});
    if (root.integer("schema_version") != kSchemaVersion) {
        throw ParseError("unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")",
                         "/schema_version");
    }
    ScenarioDocument doc;
    doc.scenario.name = root.string("name");
    if (root.has("description")) doc.scenario.description = root.string("description");
    doc.horizon = root.integer("horizon");
    if (doc.horizon < 1 || doc.horizon > 1000) throw ParseError("horizon must be in [1, 1000]", "/horizon");

    const auto& list = root.array("interventions");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "/interventions/" + std::to_string(i);
        const ObjectReader r(list[i], path, {"target", "kind", "value", "window"});
        const auto target = r.string("target");
        const auto kind = r.string("kind");
        const auto& window = r.required("window");
        if (!window.is_array() || window.size() != 2 || !window[0].is_number_integer() ||
            !window[1].is_number_integer()) {
            throw ParseError("window must be [from, to] with integer slices", r.at("window"));
        }
        const SliceWindow w{window[0].get<int>(), window[1].get<int>()};
        if (kind == "fix") {
            doc.scenario.interventions.push_back({HardDo{target, r.string("value")}, w});
        } else if (kind == "prior") {
            doc.scenario.interventions.push_back({PriorDo{target, number_list(r.required("value"), r.at("value"))}, w});
        } else {
            throw ParseError("kind must be \"fix\" or \"prior\"", r.at("kind"));
        }
    }

    if (root.has("utility")) {
        const auto& u = j["utility"];
        if (u.is_string()) {
            if (u.get<std::string>() != "abundance") {
                throw ParseError("unknown utility reference (known: \"abundance\")", "/utility");
            }
        } else {
            doc.utility = utility_from_json(u, "/utility");
            doc.utility_ref = "inline";
        }
    }
    return doc;
}

ScenarioDocument load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(parse_json_text(read_file(path), path.string()));
}

void check_scenario_document(const ScenarioDocument& doc, const TwoSliceDBN& dbn) {
    const auto& net = dbn.initial;
    const auto& list = doc.scenario.interventions;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "/interventions/" + std::to_string(i);
        const auto& iv = list[i];
        const auto& w = iv.window;
        if (w.first < 1 || w.last > doc.horizon || w.first > w.last) {
            throw ParseError("window [" + std::to_string(w.first) + ", " + std::to_string(w.last) +
                                 "] must lie inside [1, " + std::to_string(doc.horizon) + "] with from <= to",
                             path + "/window");
        }
        const auto id = net.find(iv.target());
        if (!id) throw ParseError("unknown variable '" + iv.target() + "'", path + "/target");
        const auto& var = net.variable(*id);
        if (const auto* hard = std::get_if<HardDo>(&iv.action)) {
            if (!var.state_index(hard->state)) {
                throw ParseError("'" + var.name + "' has no state '" + hard->state + "'", path + "/value");
            }
        } else {
            const auto& prior = std::get<PriorDo>(iv.action).prior;
            double sum = 0.0;
            bool in_range = prior.size() == var.cardinality();
            for (double p : prior) {
                in_range = in_range && p >= 0.0 && p <= 1.0;
                sum += p;
            }
            if (!in_range || std::abs(sum - 1.0) > 1e-9) {
                throw ParseError("prior must be a distribution over the " + std::to_string(var.cardinality()) +
                                     " states of '" + var.name + "'",
                                 path + "/value");
            }
        }
    }
    for (std::size_t k = 0; k < doc.utility.targets.size(); ++k) {
        const auto& t = doc.utility.targets[k];
        const std::string path = "/utility/targets/" + std::to_string(k);
        const auto id = net.find(t.variable);
        if (!id) throw ParseError("unknown variable '" + t.variable + "'", path + "/variable");
        if (!net.variable(*id).state_index(t.good_state)) {
            throw ParseError("'" + t.variable + "' has no state '" + t.good_state + "'", path + "/good");
        }
    }
    // Remaining checks (prior on a driven variable, overlaps) are semantic.
    check_scenario(doc.scenario, dbn, doc.horizon);
}

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string column_stem(std::string_view variable) {
    std::string s(variable);
    constexpr std::string_view suffix = "Abundance";
    if (s.size() > suffix.size() && s.ends_with(suffix)) s.resize(s.size() - suffix.size());
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void csv_line(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    out += "\r\n";
}

}  // namespace

std::string timeline_csv(const UtilityTimeline& timeline, const UtilitySpec& spec) {
    std::string out;
    std::vector<std::string> header{"slice"};
    for (const auto& t : spec.targets) header.push_back("p_" + column_stem(t.variable) + "_good");
    header.push_back("utility");
    csv_line(out, header);
    for (const auto& r : timeline.records) {
        std::vector<std::string> row{std::to_string(r.slice)};
        for (double p : r.good_probabilities) row.push_back(format_number(p));
        row.push_back(format_number(r.utility));
        csv_line(out, row);
    }
    return out;
}

std::string contributions_csv(const UtilityTimeline& timeline, const UtilitySpec& spec) {
    std::string out;
    std::vector<std::string> header{"slice"};
    for (const auto& t : spec.targets) header.push_back(column_stem(t.variable));
    header.push_back("total");
    csv_line(out, header);
    for (const auto& r : timeline.records) {
        std::vector<std::string> row{std::to_string(r.slice)};
        double total = 0.0;
        for (double c : r.contributions) {
            row.push_back(format_number(c));
            total += c;
        }
        row.push_back(format_number(total));
        csv_line(out, row);
    }
    return out;
}

std::string sensitivity_csv(const SensitivityReport& report) {
    std::string out;
    csv_line(out, {"variable", "mutual_information", "percentage_of_entropy", "variance_of_belief"});
    for (const auto& r : report.rows) {
        csv_line(out, {r.source, format_number(r.mutual_information), format_number(r.percent_of_entropy),
                       format_number(r.variance_of_belief)});
    }
    return out;
}

Json timeline_to_json(const UtilityTimeline& timeline, const UtilitySpec& spec) {
    Json targets = Json::array();
    for (const auto& t : spec.targets) targets.push_back(t.variable);
    Json records = Json::array();
    for (const auto& r : timeline.records) {
        Json marginals = Json::array();
        for (const auto& m : r.marginals) {
            marginals.push_back({{"variable", m.variable}, {"states", m.states}, {"distribution", m.distribution}});
        }
        records.push_back({{"slice", r.slice},
                           {"utility", r.utility},
                           {"good_probabilities", r.good_probabilities},
                           {"contributions", r.contributions},
                           {"marginals", marginals}});
    }
    return {{"scenario", timeline.scenario}, {"targets", targets}, {"records", records}};
}

UtilityTimeline timeline_from_json(const Json& j) {
    const ObjectReader root(j, "", {"scenario", "targets", "records"});
    UtilityTimeline tl;
    tl.scenario = root.string("scenario");
    const auto& records = root.array("records");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string path = "/records/" + std::to_string(i);
        const ObjectReader r(records[i], path, {"slice", "utility", "good_probabilities", "contributions", "marginals"});
        SliceRecord rec;
        rec.slice = r.integer("slice");
        rec.utility = r.number("utility");
        rec.good_probabilities = number_list(r.required("good_probabilities"), r.at("good_probabilities"));
        rec.contributions = number_list(r.required("contributions"), r.at("contributions"));
        const auto& ms = r.array("marginals");
        for (std::size_t k = 0; k < ms.size(); ++k) {
            const ObjectReader m(ms[k], r.at("marginals") + "/" + std::to_string(k), {"variable", "states", "distribution"});
            rec.marginals.push_back({m.string("variable"), string_list(m.required("states"), m.at("states")),
                                     number_list(m.required("distribution"), m.at("distribution"))});
        }
        tl.records.push_back(std::move(rec));
    }
    return tl;
}

Json sensitivity_to_json(const SensitivityReport& report) {
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"variable", r.source},
                        {"mutual_information", r.mutual_information},
                        {"percentage_of_entropy", r.percent_of_entropy},
                        {"variance_of_belief", r.variance_of_belief}});
    }
    return {{"target", report.target}, {"rows", rows}};
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot move " + tmp.string() + " into place");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace polinfer
