#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/agents/runtime.hpp"
#include "kgqa/agents/types.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/interp/files.hpp"

namespace httplib {
class Server;
}

namespace kgqa::service {

struct ServiceOptions {
    std::size_t upload_cap = 50ull * 1024 * 1024;
};

/// Sessions over one shared Runtime. Turns within a session run strictly in
/// arrival order; different sessions run concurrently. Every session is
/// persisted as `<artifact_root>/<id>/session.json` after each change, using
/// the runtime's artifact root.
class Service {
public:
    Service(std::shared_ptr<const agents::Runtime> runtime, ServiceOptions options);
    ~Service();

    /// Throws Error(Storage) if the session directory cannot be written.
    std::string create_session();

    /// Runs a turn, waiting behind any turn already queued for the session.
    /// Returns the final message. Throws Error(NotFound) for unknown ids.
    agents::AgentMessage post_message(const std::string& session_id, const std::string& text);

    /// Stores `content` as `filename` in the session directory and analyzes
    /// it. Rejects names with path components (Security) and oversize
    /// content (LimitExceeded).
    interp::FileSummary upload_file(const std::string& session_id, const std::string& filename,
                                    const std::string& content);

    /// Exact bytes of an artifact inside the session directory. NotFound if
    /// missing, Security if the name escapes the directory.
    std::string artifact(const std::string& session_id, const std::string& name) const;

    /// Published trace events with seq > `after`.
    std::vector<agents::TraceEvent> events(const std::string& session_id, std::int64_t after = 0) const;
    std::string trace_jsonl(const std::string& session_id) const;

    /// Blocks until the session has events past `after` or no turn is queued
    /// or running, or the timeout passes. Returns whether a turn is still
    /// active.
    bool wait_for_events(const std::string& session_id, std::int64_t after, std::chrono::milliseconds timeout) const;

    bool exists(const std::string& session_id) const;
    std::size_t upload_cap() const { return options_.upload_cap; }

    /// Installs the REST routes:
    ///   POST /sessions, POST /sessions/{id}/messages, POST /sessions/{id}/files,
    ///   GET /sessions/{id}/events (server-sent events), GET /sessions/{id}/artifacts/{name},
    ///   GET /sessions/{id}/trace (JSON lines).
    void register_routes(httplib::Server& server);

    struct Session;  // opaque

private:
    std::shared_ptr<Session> find(const std::string& session_id) const;
    void persist(const Session& s) const;

    std::shared_ptr<const agents::Runtime> runtime_;
    ServiceOptions options_;
    std::filesystem::path root_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// HTTP status for an error code.
int http_status(ErrorCode code);

/// True for ids the service hands out (32 lowercase hex characters).
bool is_session_id(std::string_view id);

/// Plain file names only: no separators, no "..", not hidden, not empty.
bool is_safe_filename(std::string_view name);

/// One server-sent-events frame for a trace event.
std::string sse_frame(const agents::TraceEvent& e);

}  // namespace kgqa::service
