#include "kgqa/sparql/endpoint.hpp"

#include <spdlog/spdlog.h>

#include "kgqa/core/error.hpp"
#include "kgqa/sparql/evaluator.hpp"
#include "kgqa/sparql/parser.hpp"

namespace kgqa::sparql {

namespace {
constexpr const char* kResultsJson = "application/sparql-results+json";
}

ResultSet LocalGraphEndpoint::select(const std::string& query) {
    return evaluate(parse_query(query), *graph_);
}

ResultSet HttpEndpoint::select(const std::string& query) {
    http::Request req;
    req.method = "POST";
    req.url = url_;
    req.content_type = "application/x-www-form-urlencoded";
    req.body = http::form_encode({{"query", query}});
    req.headers = {{"Accept", kResultsJson}};
    auto res = transport_->send(req);
    if (!res.ok()) {
        bool retriable = res.status >= 500 || res.status == 429;
        std::string snippet = res.body.substr(0, 300);
        throw Error(ErrorCode::Upstream,
                    "endpoint " + url_ + " returned HTTP " + std::to_string(res.status) + ": " + snippet, retriable);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res.body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Upstream, "endpoint " + url_ + " returned non-JSON results: " + e.what());
    }
    return from_json(doc);
}

http::Response serve_protocol_request(Endpoint& endpoint, const http::Request& request) {
    std::string query;
    auto qpos = request.url.find('?');
    if (qpos != std::string::npos) {
        auto params = http::parse_query_string(request.url.substr(qpos + 1));
        if (auto it = params.find("query"); it != params.end()) query = it->second;
    }
    if (query.empty() && request.method == "POST") {
        if (request.content_type.rfind("application/sparql-query", 0) == 0) {
            query = request.body;
        } else {
            auto params = http::parse_query_string(request.body);
            if (auto it = params.find("query"); it != params.end()) query = it->second;
        }
    }
    if (query.empty()) return {400, "missing query parameter", "text/plain"};
    try {
        auto rs = endpoint.select(query);
        return {200, to_json(rs).dump(), kResultsJson};
    } catch (const Error& e) {
        spdlog::debug("fixture endpoint rejected query: {}", e.what());
        return {e.code() == ErrorCode::Parse || e.code() == ErrorCode::InvalidInput ? 400 : 500, e.what(),
                "text/plain"};
    }
}

}  // namespace kgqa::sparql
