#pragma once

#include <atomic>
#include <filesystem>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace kgqa::http {

struct Request {
    std::string method = "GET";
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    std::string content_type;
    std::chrono::milliseconds timeout{10'000};
};

struct Response {
    int status = 0;
    std::string body;
    std::string content_type;

    bool ok() const { return status >= 200 && status < 300; }
};

/// Seam between the pipeline and the network. Production code uses the
/// cpp-httplib backed transport; tests substitute fixtures.
///
/// Connection-level failures throw kgqa::Error(Upstream, retriable=true).
/// HTTP error statuses are returned, not thrown.
class Transport {
public:
    virtual ~Transport() = default;
    virtual Response send(const Request& request) = 0;
};

class NetworkTransport final : public Transport {
public:
    Response send(const Request& request) override;
};

/// Throws on any use and counts attempts. Wired in wherever a code path must
/// never reach the network.
class FailingTransport final : public Transport {
public:
    Response send(const Request& request) override;
    int attempts() const { return attempts_.load(); }

private:
    std::atomic<int> attempts_{0};
};

/// Routes requests to a handler and records them; the usual test double.
class FunctionTransport final : public Transport {
public:
    using Handler = std::function<Response(const Request&)>;
    explicit FunctionTransport(Handler handler) : handler_(std::move(handler)) {}

    Response send(const Request& request) override;
    std::vector<Request> requests() const;

private:
    Handler handler_;
    mutable std::mutex mutex_;
    std::vector<Request> log_;
};

struct UrlParts {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path_and_query;
};

UrlParts split_url(const std::string& url);

/// application/x-www-form-urlencoded body from key/value pairs.
std::string form_encode(const std::vector<std::pair<std::string, std::string>>& fields);

/// Parses `a=b&c=d` (percent-decoded, '+' as space).
std::map<std::string, std::string> parse_query_string(const std::string& qs);

/// Canned responses keyed by method and exact URL, loaded from a JSON file:
/// {"routes": [{"method", "url", "status", "content_type", "body" | "body_file"}]}.
/// body_file is relative to the fixture file. Unmatched requests throw
/// Error(Upstream) naming the URL; nothing touches the network.
class FixtureTransport final : public Transport {
public:
    static std::shared_ptr<FixtureTransport> load(const std::filesystem::path& path);
    void add(const std::string& method, const std::string& url, Response response);
    Response send(const Request& request) override;
    std::size_t hits() const { return hits_.load(); }

private:
    std::map<std::pair<std::string, std::string>, Response> routes_;
    std::atomic<std::size_t> hits_{0};
};

}  // namespace kgqa::http
