#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polinfer/documents.hpp"
#include "polinfer/errors.hpp"
#include "polinfer/pollinator.hpp"
#include "polinfer/runs.hpp"
#include "polinfer/service.hpp"

namespace fs = std::filesystem;
using namespace polinfer;

namespace {

fs::path resolve_model(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("POLINFER_MODEL_PATH"); env && *env) return env;
    return fs::path(POLINFER_DATA_DIR) / "pollinator_model.json";
}

/// Writes every file or none: on failure, files already written are removed.
void write_all(const std::vector<std::pair<fs::path, std::string>>& files) {
    std::vector<fs::path> written;
    try {
        for (const auto& [path, content] : files) {
            write_file_atomic(path, content);
            written.push_back(path);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        throw;
    }
}

std::string describe(const ParseError& e) { return e.what(); }

struct Options {
    std::string model;
    std::string scenario;
    std::optional<int> horizon;
    std::string out;
    std::uint64_t seed = 0;
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string runs = "runs";
    std::string target;
    int slice = 2;
    int top = 10;
    int max_iterations = 200;
    bool accept_residuals = false;
    std::string start;
    std::string start_values;
};

std::vector<double> read_values(const fs::path& path) {
    std::vector<double> values;
    std::string text = read_file(path);
    for (char& c : text) {
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    }
    std::istringstream in(text);
    for (double v; in >> v;) values.push_back(v);
    if (!in.eof()) throw ParseError("non-numeric entry in " + path.string());
    return values;
}

int cmd_validate(const Options& o) {
    const auto path = resolve_model(o.model);
    const auto doc = load_model(path);
    std::cout << "model " << path.string() << ": ok (" << doc.dbn.initial.size() << " variables, hash "
              << model_hash(doc) << ")\n";
    if (!o.scenario.empty()) {
        auto sc = load_scenario(o.scenario);
        if (o.horizon) sc.horizon = *o.horizon;
        check_scenario_document(sc, doc.dbn);
        std::cout << "scenario " << o.scenario << ": ok (" << sc.scenario.interventions.size()
                  << " interventions, horizon " << sc.horizon << ")\n";
    }
    return 0;
}

int cmd_run(const Options& o) {
    const auto doc = load_model(resolve_model(o.model));
    ScenarioDocument sc;
    if (!o.scenario.empty()) {
        sc = load_scenario(o.scenario);
    } else {
        sc.scenario = {"baseline", "No change.", {}};
    }
    if (o.horizon) sc.horizon = *o.horizon;
    const auto tl = evaluate(doc.dbn, sc);

    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    fs::create_directories(dir);
    const std::string stem = sc.scenario.name.empty() ? "run" : sc.scenario.name;
    RunRecord record;
    record.model_hash = model_hash(doc);
    record.id = run_id(record.model_hash, sc);
    record.scenario = sc;
    record.timeline = tl;
    record.created_at = utc_timestamp();
    write_all({{dir / (stem + "_timeline.csv"), timeline_csv(tl, sc.utility)},
               {dir / (stem + "_contributions.csv"), contributions_csv(tl, sc.utility)},
               {dir / (stem + "_run.json"), canonical_text(run_to_json(record))}});

    std::printf("%-6s %s\n", "slice", "utility");
    for (const auto& r : tl.records) std::printf("%-6d %.2f\n", r.slice, r.utility);
    return 0;
}

int cmd_sensitivity(const Options& o) {
    const auto doc = load_model(resolve_model(o.model));
    if (!doc.dbn.initial.find(o.target)) throw LookupError("unknown variable '" + o.target + "'");
    const auto unrolled = unroll(doc.dbn, o.slice);
    const auto node = slice_name(o.target, o.slice);
    std::vector<std::string> candidates;
    for (const auto& v : unrolled.net.variables()) {
        if (v.name != node) candidates.push_back(v.name);
    }
    const auto report = sensitivity_ranking(unrolled.net, node, candidates, static_cast<std::size_t>(o.top));
    if (!o.out.empty()) write_all({{o.out, sensitivity_csv(report)}});
    std::printf("%-32s %10s %8s %12s\n", node.c_str(), "I (bits)", "% H", "S^2");
    for (const auto& r : report.rows) {
        std::printf("%-32s %10.5f %8.3f %12.7f\n", r.source.c_str(), r.mutual_information, r.percent_of_entropy,
                    r.variance_of_belief);
    }
    return 0;
}

int cmd_calibrate(const Options& o) {
    pollinator::CalibrationOptions options;
    options.seed = o.seed;
    options.max_iterations = o.max_iterations;
    options.progress = [](int it, double loss) { std::fprintf(stderr, "iteration %3d  loss %.8g\n", it, loss); };
    if (!o.start.empty()) {
        const auto start = load_model(o.start);
        const auto& params = start.metadata.at("calibrated_parameters");
        const auto labels = pollinator::FreeParameters::labels();
        std::vector<double> values;
        for (const auto& l : labels) values.push_back(params.at(l).get<double>());
        options.start = pollinator::FreeParameters::unpack(values);
    } else if (!o.start_values.empty()) {
        options.start = pollinator::FreeParameters::unpack(read_values(o.start_values));
    }
    const auto model = pollinator::calibrate(pollinator::build_structure(), pollinator::fixed_parameters(),
                                             pollinator::published_anchors(), options);
    const auto& report = model.report;
    std::printf("iterations %d, loss %.8g, max marginal residual %.4f (tolerance %.4f)\n", report.iterations,
                report.loss, report.max_marginal_residual(), report.tolerance);
    for (const auto& w : report.weakly_identified) std::printf("weakly identified: %s\n", w.c_str());
    if (!report.success) {
        std::fprintf(stderr, "calibration failure: %zu marginal anchors above tolerance\n",
                     report.failing_anchors.size());
        for (const auto& a : report.failing_anchors) std::fprintf(stderr, "  %s\n", a.c_str());
        if (!o.accept_residuals) {
            std::fprintf(stderr, "no model written (pass --accept-residuals to keep it)\n");
            return 3;
        }
    }
    write_all({{o.out, canonical_text(model_to_json(export_model(model)))}});
    std::printf("wrote %s\n", o.out.c_str());
    return 0;
}

int cmd_serve(const Options& o) {
    auto doc = load_model(resolve_model(o.model));
    Service service(std::move(doc), o.runs);
    std::printf("serving model %s on http://%s:%d\n", service.hash().c_str(), o.host.c_str(), o.port);
    std::fflush(stdout);
    serve(service, o.host, o.port);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic Bayesian network scenario engine"};
    app.require_subcommand(1);
    Options o;

    auto* validate = app.add_subcommand("validate", "Check a model document (and optionally a scenario)");
    validate->add_option("--model", o.model, "Model document (default $POLINFER_MODEL_PATH)");
    validate->add_option("--scenario", o.scenario, "Scenario document");
    validate->add_option("--horizon", o.horizon, "Override the scenario horizon");

    auto* run = app.add_subcommand("run", "Evaluate a scenario and write CSV and JSON results");
    run->add_option("--model", o.model, "Model document (default $POLINFER_MODEL_PATH)");
    run->add_option("--scenario", o.scenario, "Scenario document (default: no intervention)");
    run->add_option("--horizon", o.horizon, "Override the scenario horizon");
    run->add_option("--out", o.out, "Output directory (default .)");

    auto* sensitivity = app.add_subcommand("sensitivity", "Rank nodes by mutual information with a target");
    sensitivity->add_option("--model", o.model, "Model document (default $POLINFER_MODEL_PATH)");
    sensitivity->add_option("--target", o.target, "Target variable")->required();
    sensitivity->add_option("--slice", o.slice, "Slice of the target (network unrolled to it)")
        ->check(CLI::Range(1, 20));
    sensitivity->add_option("--top", o.top, "Rows to keep")->check(CLI::PositiveNumber);
    sensitivity->add_option("--out", o.out, "CSV output file");

    auto* calibrate = app.add_subcommand("calibrate", "Fit the pollinator model to the published anchors");
    calibrate->add_option("--out", o.out, "Model document to write")->required();
    calibrate->add_option("--seed", o.seed, "Start jitter seed (0: no jitter)");
    calibrate->add_option("--max-iterations", o.max_iterations, "Iteration cap")->check(CLI::NonNegativeNumber);
    calibrate->add_option("--start", o.start, "Warm start from a calibrated model document");
    calibrate->add_option("--start-values", o.start_values, "Warm start from comma-separated packed parameters")
        ->excludes("--start");
    calibrate->add_flag("--accept-residuals", o.accept_residuals,
                        "Write the model even when marginal anchors miss the tolerance");

    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP/JSON API");
    serve_cmd->add_option("--model", o.model, "Model document (default $POLINFER_MODEL_PATH)");
    serve_cmd->add_option("--port", o.port, "Port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", o.host, "Bind address");
    serve_cmd->add_option("--runs", o.runs, "Run-record directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*validate) return cmd_validate(o);
        if (*run) return cmd_run(o);
        if (*sensitivity) return cmd_sensitivity(o);
        if (*calibrate) return cmd_calibrate(o);
        if (*serve_cmd) return cmd_serve(o);
    } catch (const ParseError& e) {
        std::cerr << "error: " << describe(e) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
