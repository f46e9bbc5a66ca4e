#pragma once

#include <memory>
#include <string>

#include "kgqa/core/http.hpp"
#include "kgqa/rdf/graph.hpp"
#include "kgqa/sparql/results.hpp"

namespace kgqa::sparql {

/// A source of SELECT results. Throws Error(Upstream) for transport and HTTP
/// failures and Error(Parse) when the query is rejected.
class Endpoint {
public:
    virtual ~Endpoint() = default;
    virtual ResultSet select(const std::string& query) = 0;
    virtual std::string describe() const = 0;
};

/// Evaluates against an in-memory graph (the bundled fixture graph).
class LocalGraphEndpoint final : public Endpoint {
public:
    explicit LocalGraphEndpoint(std::shared_ptr<const rdf::Graph> graph) : graph_(std::move(graph)) {}
    ResultSet select(const std::string& query) override;
    std::string describe() const override { return "local-graph"; }

    const rdf::Graph& graph() const { return *graph_; }

private:
    std::shared_ptr<const rdf::Graph> graph_;
};

/// SPARQL 1.1 Protocol client: POST with a form-encoded `query`, JSON
/// results requested via Accept.
class HttpEndpoint final : public Endpoint {
public:
    HttpEndpoint(std::string url, std::shared_ptr<http::Transport> transport)
        : url_(std::move(url)), transport_(std::move(transport)) {}
    ResultSet select(const std::string& query) override;
    std::string describe() const override { return url_; }

private:
    std::string url_;
    std::shared_ptr<http::Transport> transport_;
};

/// Answers a SPARQL protocol request (GET ?query= or POST form/body) from a
/// local endpoint. Shared by the fixture server and in-process transports.
http::Response serve_protocol_request(Endpoint& endpoint, const http::Request& request);

}  // namespace kgqa::sparql
