#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "kgqa/core/http.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::http {

UrlParts split_url(const std::string& url) {
    UrlParts parts;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidInput, "malformed URL: " + url);
    parts.scheme = text::lower(url.substr(0, scheme_end));
    if (parts.scheme != "http" && parts.scheme != "https")
        throw Error(ErrorCode::InvalidInput, "unsupported URL scheme: " + url);
    auto rest = url.substr(scheme_end + 3);
    auto slash = rest.find_first_of("/?");
    std::string authority = rest.substr(0, slash);
    parts.path_and_query = slash == std::string::npos ? "/" : rest.substr(slash);
    if (!parts.path_and_query.empty() && parts.path_and_query[0] == '?')
        parts.path_and_query = "/" + parts.path_and_query;
    auto colon = authority.rfind(':');
    if (colon != std::string::npos && authority.find(']') == std::string::npos) {
        parts.host = authority.substr(0, colon);
        try {
            parts.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidInput, "malformed port in URL: " + url);
        }
    } else {
        parts.host = authority;
        parts.port = parts.scheme == "https" ? 443 : 80;
    }
    if (parts.host.empty()) throw Error(ErrorCode::InvalidInput, "URL has no host: " + url);
    return parts;
}

std::string form_encode(const std::vector<std::pair<std::string, std::string>>& fields) {
    std::string out;
    for (const auto& [k, v] : fields) {
        if (!out.empty()) out += '&';
        out += text::percent_encode(k);
        out += '=';
        out += text::percent_encode(v);
    }
    return out;
}

std::map<std::string, std::string> parse_query_string(const std::string& qs) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos <= qs.size()) {
        auto amp = qs.find('&', pos);
        auto part = qs.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
        if (!part.empty()) {
            auto eq = part.find('=');
            if (eq == std::string::npos) {
                out[text::percent_decode(part)] = "";
            } else {
                out[text::percent_decode(part.substr(0, eq))] = text::percent_decode(part.substr(eq + 1));
            }
        }
        if (amp == std::string::npos) break;
        pos = amp + 1;
    }
    return out;
}

Response NetworkTransport::send(const Request& request) {
    auto parts = split_url(request.url);
    httplib::Client client(parts.scheme + "://" + parts.host + ":" + std::to_string(parts.port));
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_follow_location(true);

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);

    httplib::Result result;
    if (request.method == "GET") {
        result = client.Get(parts.path_and_query, headers);
    } else if (request.method == "POST") {
        result = client.Post(parts.path_and_query, headers, request.body,
                             request.content_type.empty() ? "application/octet-stream" : request.content_type);
    } else {
        throw Error(ErrorCode::InvalidInput, "unsupported HTTP method: " + request.method);
    }
    if (!result) {
        auto msg = httplib::to_string(result.error());
        spdlog::warn("http {} {} failed: {}", request.method, request.url, msg);
        throw Error(ErrorCode::Upstream, "request to " + request.url + " failed: " + msg, true);
    }
    Response response;
    response.status = result->status;
    response.body = result->body;
    response.content_type = result->get_header_value("Content-Type");
    return response;
}

Response FailingTransport::send(const Request& request) {
    ++attempts_;
    throw Error(ErrorCode::Internal, "network access forbidden in this configuration: " + request.url);
}

Response FunctionTransport::send(const Request& request) {
    {
        std::lock_guard lock(mutex_);
        log_.push_back(request);
    }
    return handler_(request);
}

std::vector<Request> FunctionTransport::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::shared_ptr<FixtureTransport> FixtureTransport::load(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, "bad HTTP fixture file " + path.string() + ": " + e.what());
    }
    auto t = std::make_shared<FixtureTransport>();
    for (const auto& r : doc.value("routes", nlohmann::json::array())) {
        Response res;
        res.status = r.value("status", 200);
        res.content_type = r.value("content_type", "text/plain");
        if (r.contains("body_file")) {
            res.body = text::read_file(path.parent_path() / r["body_file"].get<std::string>());
        } else {
            res.body = r.value("body", "");
        }
        t->add(r.value("method", "GET"), r.at("url").get<std::string>(), std::move(res));
    }
    return t;
}

void FixtureTransport::add(const std::string& method, const std::string& url, Response response) {
    routes_[{method, url}] = std::move(response);
}

Response FixtureTransport::send(const Request& request) {
    auto it = routes_.find({request.method, request.url});
    if (it == routes_.end()) {
        throw Error(ErrorCode::Upstream, "no HTTP fixture for " + request.method + " " + request.url);
    }
    ++hits_;
    return it->second;
}

}  // namespace kgqa::http
