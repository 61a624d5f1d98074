#include "polinfer/service.hpp"

#include <charconv>

#include "httplib.h"
#include "polinfer/errors.hpp"
#include "polinfer/inference.hpp"

namespace polinfer {

namespace {

std::optional<int> parse_int(const std::string& s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

Json cpt_json(const Cpt& c) { return {{"parents", c.parents}, {"rows", c.rows}}; }

Json transition_json(const TransitionCpt& t) {
    Json parents = Json::array();
    for (const auto& p : t.parents) {
        parents.push_back({{"name", p.name}, {"lag", p.lag == Lag::Current ? "current" : "previous"}});
    }
    return {{"parents", parents}, {"rows", t.rows}};
}

Json stacked_contributions(const UtilityTimeline& tl, const UtilitySpec& spec) {
    Json groups = Json::array();
    for (const auto& t : spec.targets) groups.push_back(t.variable);
    Json slices = Json::array();
    for (const auto& r : tl.records) {
        double total = 0.0;
        for (double c : r.contributions) total += c;
        slices.push_back({{"slice", r.slice},
                          {"good_probabilities", r.good_probabilities},
                          {"contributions", r.contributions},
                          {"total", total}});
    }
    return {{"groups", groups}, {"slices", slices}};
}

}  // namespace

Service::Service(ModelDocument model, std::filesystem::path run_directory)
    : model_(std::move(model)), hash_(model_hash(model_)), store_(std::move(run_directory)) {
    const auto report = validate(model_.dbn);
    if (!report.ok()) throw StructuralError("service model does not validate:\n" + report.summary());
    const auto& net = model_.dbn.initial;
    slice_one_ = Json::array();
    for (const auto& v : net.variables()) {
        const auto m = posterior_marginal(net, v.name);
        slice_one_.push_back({{"name", v.name}, {"states", v.states}, {"marginal", m.distribution}});
    }
}

Json Service::with_hash(Json body) const {
    body["model_hash"] = hash_;
    return body;
}

Service::Reply Service::error(int status, const std::string& message, const std::string& field) const {
    Json body{{"error", message}};
    if (!field.empty()) body["field"] = field;
    return {status, with_hash(std::move(body))};
}

Service::Reply Service::get_model() const {
    const auto& dbn = model_.dbn;
    Json edges = Json::array();
    for (const auto& e : dbn.intra_edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"temporal", false}});
    for (const auto& e : dbn.temporal_edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"temporal", true}});
    Json variables = slice_one_;
    for (auto& v : variables) {
        const auto name = v["name"].get<std::string>();
        Json parents = Json::array();
        for (auto p : dbn.initial.parents(dbn.initial.index_of(name))) parents.push_back(dbn.initial.variable(p).name);
        Json temporal = Json::array();
        for (const auto& e : dbn.temporal_edges) {
            if (e.to == name) temporal.push_back(e.from);
        }
        v["parents"] = parents;
        v["temporal_parents"] = temporal;
    }
    return {200, with_hash({{"name", model_.name}, {"variables", variables}, {"edges", edges},
                            {"metadata", model_.metadata}})};
}

Service::Reply Service::get_node(const std::string& name) const {
    const auto& net = model_.dbn.initial;
    const auto id = net.find(name);
    if (!id) return error(404, "unknown node '" + name + "'", "name");
    const auto& v = net.variable(*id);
    Json body{{"name", v.name}, {"states", v.states}, {"cpt", cpt_json(*net.cpt(*id))},
              {"transition", transition_json(model_.dbn.transition(v.name))}};
    Json parents = Json::array();
    for (auto p : net.parents(*id)) parents.push_back(net.variable(p).name);
    body["parents"] = parents;
    return {200, with_hash(std::move(body))};
}

namespace {

struct Rejected {
    int status;
    std::string message;
    std::string field;
};

// Parses and checks a scenario document, mapping failures to HTTP statuses.
std::variant<ScenarioDocument, Rejected> checked_scenario(const Json& j, const TwoSliceDBN& dbn) {
    try {
        auto doc = scenario_from_json(j);
        check_scenario_document(doc, dbn);
        return doc;
    } catch (const ParseError& e) {
        return Rejected{400, e.what(), e.field()};
    } catch (const SemanticsError& e) {
        return Rejected{422, e.what(), {}};
    } catch (const ConflictError& e) {
        return Rejected{422, e.what(), {}};
    } catch (const Error& e) {
        return Rejected{400, e.what(), {}};
    }
}

}  // namespace

Service::Reply Service::evaluate_scenario(const std::string& body) const {
    Json j;
    try {
        j = parse_json_text(body, "request body");
    } catch (const ParseError& e) {
        return error(400, e.what());
    }
    auto checked = checked_scenario(j, model_.dbn);
    if (auto* r = std::get_if<Rejected>(&checked)) return error(r->status, r->message, r->field);
    const auto& doc = std::get<ScenarioDocument>(checked);
    const auto tl = evaluate(model_.dbn, doc);
    return {200, with_hash({{"scenario", scenario_to_json(doc)},
                            {"timeline", timeline_to_json(tl, doc.utility)},
                            {"contributions", stacked_contributions(tl, doc.utility)}})};
}

Service::Reply Service::get_sensitivity(const std::optional<std::string>& target, const std::optional<std::string>& slice,
                                        const std::optional<std::string>& top) const {
    if (!target || target->empty()) return error(400, "query parameter 'target' is required", "target");
    const auto& net = model_.dbn.initial;
    if (!net.find(*target)) return error(404, "unknown node '" + *target + "'", "target");
    int t = 2;
    if (slice) {
        const auto v = parse_int(*slice);
        if (!v || *v < 1 || *v > 20) return error(400, "slice must be an integer in [1, 20]", "slice");
        t = *v;
    }
    std::size_t k = 10;
    if (top) {
        const auto v = parse_int(*top);
        if (!v || *v < 1) return error(400, "top must be a positive integer", "top");
        k = static_cast<std::size_t>(*v);
    }
    const auto unrolled = unroll(model_.dbn, t);
    const auto node = slice_name(*target, t);
    std::vector<std::string> candidates;
    for (const auto& v : unrolled.net.variables()) {
        if (v.name != node) candidates.push_back(v.name);
    }
    const auto report = sensitivity_ranking(unrolled.net, node, candidates, k);
    return {200, with_hash(sensitivity_to_json(report))};
}

Service::Reply Service::list_runs() const {
    Json runs = Json::array();
    for (const auto& r : store_.list()) {
        runs.push_back({{"id", r.id},
                        {"scenario", r.scenario.scenario.name},
                        {"run_model_hash", r.model_hash},
                        {"created_at", r.created_at}});
    }
    return {200, with_hash({{"runs", runs}})};
}

Service::Reply Service::get_run(const std::string& id) const {
    const auto r = store_.get(id);
    if (!r) return error(404, "unknown run '" + id + "'", "id");
    return {200, with_hash({{"run", run_to_json(*r)}})};
}

Service::Reply Service::create_run(const std::string& body) {
    Json j;
    try {
        j = parse_json_text(body, "request body");
    } catch (const ParseError& e) {
        return error(400, e.what());
    }
    // Either a bare scenario document or {"scenario": ..., "model_hash": ...}.
    Json scenario = j;
    if (j.is_object() && j.contains("scenario") && !j.contains("schema_version")) {
        for (const auto& [key, value] : j.items()) {
            if (key != "scenario" && key != "model_hash") return error(400, "unknown field", "/" + key);
        }
        if (j.contains("model_hash")) {
            if (!j["model_hash"].is_string()) return error(400, "expected a string", "/model_hash");
            if (j["model_hash"].get<std::string>() != hash_) {
                return error(409, "request was prepared against model " + j["model_hash"].get<std::string>(),
                             "/model_hash");
            }
        }
        scenario = j["scenario"];
    }
    auto checked = checked_scenario(scenario, model_.dbn);
    if (auto* r = std::get_if<Rejected>(&checked)) return error(r->status, r->message, r->field);
    auto& doc = std::get<ScenarioDocument>(checked);

    RunRecord record;
    record.model_hash = hash_;
    record.id = run_id(hash_, doc);
    record.timeline = evaluate(model_.dbn, doc);
    record.scenario = std::move(doc);
    record.created_at = utc_timestamp();
    const auto stored = store_.put(std::move(record));
    return {201, with_hash({{"run", run_to_json(stored)}})};
}

Service::Reply Service::replay_run(const std::string& id) {
    const auto r = store_.get(id);
    if (!r) return error(404, "unknown run '" + id + "'", "id");
    if (r->model_hash != hash_) {
        return error(409, "run " + id + " was produced by model " + r->model_hash, "model_hash");
    }
    const auto tl = evaluate(model_.dbn, r->scenario);
    const bool same = timeline_to_json(tl, r->scenario.utility) == timeline_to_json(r->timeline, r->scenario.utility);
    return {200, with_hash({{"run", run_to_json(*r)}, {"reproduced", same}})};
}

void Service::mount(httplib::Server& server) {
    auto send = [this](httplib::Response& res, const Reply& reply) {
        res.status = reply.status;
        res.set_header("X-Model-Hash", hash_);
        res.set_content(reply.body.dump(), "application/json");
    };
    auto param = [](const httplib::Request& req, const char* key) -> std::optional<std::string> {
        if (!req.has_param(key)) return std::nullopt;
        return req.get_param_value(key);
    };

    server.Get("/model", [=, this](const httplib::Request&, httplib::Response& res) { send(res, get_model()); });
    server.Get(R"(/nodes/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
        send(res, get_node(req.matches[1]));
    });
    server.Post("/scenarios/evaluate", [=, this](const httplib::Request& req, httplib::Response& res) {
        send(res, evaluate_scenario(req.body));
    });
    server.Get("/sensitivity", [=, this](const httplib::Request& req, httplib::Response& res) {
        send(res, get_sensitivity(param(req, "target"), param(req, "slice"), param(req, "top")));
    });
    server.Get("/runs", [=, this](const httplib::Request&, httplib::Response& res) { send(res, list_runs()); });
    server.Get(R"(/runs/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
        send(res, get_run(req.matches[1]));
    });
    server.Post("/runs", [=, this](const httplib::Request& req, httplib::Response& res) {
        send(res, create_run(req.body));
    });
    server.Post(R"(/runs/([^/]+)/replay)", [=, this](const httplib::Request& req, httplib::Response& res) {
        send(res, replay_run(req.matches[1]));
    });
    server.set_exception_handler([=, this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            message = e.what();
        } catch (...) {
        }
        send(res, error(500, message));
    });
    server.set_error_handler([=, this](const httplib::Request& req, httplib::Response& res) {
        if (res.status == 404 && res.body.empty()) send(res, error(404, "no route for " + req.method + " " + req.path));
    });
}

void serve(Service& service, const std::string& host, int port) {
    httplib::Server server;
    service.mount(server);
    if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace polinfer
