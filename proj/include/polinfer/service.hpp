#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "polinfer/documents.hpp"
#include "polinfer/runs.hpp"

namespace httplib {
class Server;
}

namespace polinfer {

/**
 * JSON service over one immutable model.
 *
 *   GET  /model                       structure and slice-1 marginals
 *   GET  /nodes/{name}                states, parents, CPTs
 *   POST /scenarios/evaluate          scenario document -> timeline
 *   GET  /sensitivity?target=&slice=  mutual-information ranking (top= optional)
 *   GET  /runs, GET /runs/{id}        persisted run records
 *   POST /runs                        evaluate and persist
 *   POST /runs/{id}/replay            re-evaluate a stored run
 *
 * Every body carries "model_hash" and every response an X-Model-Hash header.
 * Errors are {"error", "field"?, "model_hash"} with 400 for malformed input,
 * 404 for unknown nodes or runs, 409 for a model-hash mismatch and 422 for
 * interventions the model cannot express.
 */
class Service {
public:
    struct Reply {
        int status = 200;
        Json body;
    };

    Service(ModelDocument model, std::filesystem::path run_directory);

    const std::string& hash() const noexcept { return hash_; }
    const ModelDocument& model() const noexcept { return model_; }

    Reply get_model() const;
    Reply get_node(const std::string& name) const;
    Reply evaluate_scenario(const std::string& body) const;
    Reply get_sensitivity(const std::optional<std::string>& target, const std::optional<std::string>& slice,
                          const std::optional<std::string>& top) const;
    Reply list_runs() const;
    Reply get_run(const std::string& id) const;
    Reply create_run(const std::string& body);
    Reply replay_run(const std::string& id);

    /// Registers every route on `server`.
    void mount(httplib::Server& server);

private:
    Reply error(int status, const std::string& message, const std::string& field = {}) const;
    Json with_hash(Json body) const;

    ModelDocument model_;
    std::string hash_;
    Json slice_one_;
    RunStore store_;
};

/// Blocking: serves `service` on host:port until the process is stopped.
void serve(Service& service, const std::string& host, int port);

}  // namespace polinfer
