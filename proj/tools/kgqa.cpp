// kgqa command-line entry point: service, one-off questions, evaluation
// runs, cassette authoring and a local SPARQL endpoint for fixtures.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kgqa/agents/runtime.hpp"
#include "kgqa/app/author.hpp"
#include "kgqa/app/config.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"
#include "kgqa/eval/runner.hpp"
#include "kgqa/rdf/turtle.hpp"
#include "kgqa/service/service.hpp"
#include "kgqa/sparql/endpoint.hpp"

namespace fs = std::filesystem;
using namespace kgqa;

namespace {

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server) g_server->stop();
}

app::AppConfig load(const std::string& path, const std::string& mode, const std::string& artifact_root) {
    auto cfg = mode.empty() ? app::load_config(path) : app::load_config(path, llm::parse_mode(mode));
    if (!artifact_root.empty()) cfg.artifact_root = fs::absolute(artifact_root);
    return cfg;
}

int serve(const app::AppConfig& cfg, const std::string& host, int port) {
    auto ctx = app::build_context(cfg);
    auto runtime = std::make_shared<agents::Runtime>(ctx->runtime_config(), ctx->completer());
    service::Service svc(runtime, {cfg.upload_cap});
    httplib::Server server;
    svc.register_routes(server);
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    spdlog::info("listening on {}:{}", host, port);
    if (!server.listen(host, port)) {
        spdlog::error("cannot listen on {}:{}", host, port);
        return 1;
    }
    if (cfg.mode == llm::Mode::Record) ctx->gateway->cassette()->save(cfg.cassette);
    return 0;
}

int ask(const app::AppConfig& cfg, const std::string& question, const std::string& trace_out) {
    auto ctx = app::build_context(cfg);
    agents::Runtime runtime(ctx->runtime_config(), ctx->completer());
    agents::SessionState st;
    st.session_id = "cli";
    auto msg = runtime.run_turn(st, question);
    std::cout << msg.text() << "\n";
    if (!trace_out.empty()) text::write_file(trace_out, agents::trace_jsonl(st.trace));
    return msg.kind == agents::MessageKind::Error ? 2 : 0;
}

int eval_run(const app::AppConfig& cfg, const std::string& dataset, const std::string& out,
             const std::string& records_out, bool llm_judge) {
    auto ctx = app::build_context(cfg);
    auto questions = eval::load_dataset(dataset);
    eval::JudgeOptions judge;
    if (llm_judge) {
        judge.complete = ctx->completer();
        judge.prompts = &ctx->prompts;
        judge.model = cfg.model;
    }
    std::ofstream records;
    if (!records_out.empty()) records.open(records_out);
    auto recs = eval::run_dataset(*ctx, questions, judge, [&](const eval::EvalRecord& r) {
        if (records) records << eval::to_json(r).dump() << "\n" << std::flush;
    });
    auto report = eval::aggregate_metrics(recs, cfg.exclusions);
    text::write_file(out, eval::to_json(report).dump(2) + "\n");
    std::cout << eval::format_report(report);
    return 0;
}

int fixture_endpoint(const std::string& ttl, const std::string& host, int port) {
    auto graph = std::make_shared<rdf::Graph>(rdf::load_graph(text::read_file(ttl)));
    sparql::LocalGraphEndpoint endpoint(graph);
    httplib::Server server;
    auto handle = [&](const httplib::Request& req, httplib::Response& res) {
        http::Request r;
        r.method = req.method;
        r.url = "http://" + host + req.target;
        r.body = req.body;
        r.content_type = req.get_header_value("Content-Type");
        if (req.method == "GET" && req.has_param("query")) {
            r.url = "http://" + host + req.path + "?query=" + text::percent_encode(req.get_param_value("query"));
        }
        auto out = sparql::serve_protocol_request(endpoint, r);
        res.status = out.status;
        res.set_content(out.body, out.content_type.empty() ? "text/plain" : out.content_type);
    };
    server.Get("/sparql", handle);
    server.Post("/sparql", handle);
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    spdlog::info("serving {} at http://{}:{}/sparql", ttl, host, port);
    return server.listen(host, port) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("kgqa"));
    CLI::App cli{"Natural-language questions over a metabolomics knowledge graph"};
    cli.require_subcommand(1);
    std::string config, mode, artifact_root, log_level = "info";
    cli.add_option("--log-level", log_level, "trace, debug, info, warn, error");

    auto* serve_cmd = cli.add_subcommand("serve", "Run the HTTP session service");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve_cmd->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    serve_cmd->add_option("--mode", mode, "live, record or replay (overrides the config)");
    serve_cmd->add_option("--artifact-root", artifact_root, "Override the artifact directory");
    serve_cmd->add_option("--host", host);
    serve_cmd->add_option("--port", port);

    auto* ask_cmd = cli.add_subcommand("ask", "Answer one question in a fresh session");
    std::string question, trace_out;
    ask_cmd->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    ask_cmd->add_option("--mode", mode, "live, record or replay (overrides the config)");
    ask_cmd->add_option("--artifact-root", artifact_root, "Override the artifact directory");
    ask_cmd->add_option("--trace", trace_out, "Write the turn trace as JSON lines");
    ask_cmd->add_option("question", question, "The question")->required();

    auto* eval_cmd = cli.add_subcommand("eval", "Evaluation harness");
    eval_cmd->require_subcommand(1);
    auto* eval_run_cmd = eval_cmd->add_subcommand("run", "Run a dataset and write a report");
    std::string dataset, out, records_out;
    bool llm_judge = false;
    eval_run_cmd->add_option("--dataset", dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
    eval_run_cmd->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    eval_run_cmd->add_option("--mode", mode, "live or replay (overrides the config)");
    eval_run_cmd->add_option("--artifact-root", artifact_root, "Override the artifact directory");
    eval_run_cmd->add_option("--out", out, "Report JSON")->required();
    eval_run_cmd->add_option("--records", records_out, "Per-question JSON lines");
    eval_run_cmd->add_flag("--llm-judge", llm_judge, "Ask the LLM judge when result sets differ");

    auto* cassette_cmd = cli.add_subcommand("cassette", "Cassette tools");
    cassette_cmd->require_subcommand(1);
    auto* author_cmd = cassette_cmd->add_subcommand("author", "Record a cassette from a response script");
    std::string script, cassette_out;
    author_cmd->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    author_cmd->add_option("--script", script, "Response script")->required()->check(CLI::ExistingFile);
    author_cmd->add_option("--out", cassette_out, "Cassette to write")->required();
    author_cmd->add_option("--artifact-root", artifact_root, "Override the artifact directory");

    auto* fixture_cmd = cli.add_subcommand("fixture-endpoint", "Serve a Turtle file as a SPARQL endpoint");
    std::string ttl;
    fixture_cmd->add_option("--ttl", ttl, "Turtle file")->required()->check(CLI::ExistingFile);
    fixture_cmd->add_option("--host", host);
    fixture_cmd->add_option("--port", port);

    CLI11_PARSE(cli, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*serve_cmd) return serve(load(config, mode, artifact_root), host, port);
        if (*ask_cmd) return ask(load(config, mode, artifact_root), question, trace_out);
        if (*eval_run_cmd) return eval_run(load(config, mode, artifact_root), dataset, out, records_out, llm_judge);
        if (*author_cmd) {
            auto cfg = app::load_config(config, llm::Mode::Record);
            if (!artifact_root.empty()) cfg.artifact_root = fs::absolute(artifact_root);
            auto res = app::author_cassette(cfg, script, cassette_out);
            std::cout << "wrote " << cassette_out << " (" << res.completions << " completions)\n";
            return 0;
        }
        if (*fixture_cmd) return fixture_endpoint(ttl, host, port);
    } catch (const Error& e) {
        spdlog::error("{}: {}", to_string(e.code()), e.what());
        return 1;
    }
    return 0;
}
