#include "kgqa/service/service.hpp"

#include <random>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace fs = std::filesystem;

namespace kgqa::service {

struct Service::Session {
    std::string id;
    fs::path dir;
    agents::SessionState state;  // only touched while holding the turn ticket

    mutable std::mutex mu;  // guards everything below
    mutable std::condition_variable cv;
    std::vector<agents::TraceEvent> published;
    std::uint64_t next_ticket = 0;
    std::uint64_t serving = 0;

    bool active() const { return serving != next_ticket; }

    void publish(const agents::TraceEvent& e) {
        {
            std::lock_guard lk(mu);
            published.push_back(e);
        }
        cv.notify_all();
    }
};

namespace {

// FIFO admission to a session: holders run one at a time in arrival order.
class Ticket {
public:
    explicit Ticket(const std::shared_ptr<Service::Session>& s) : s_(*s) {
        std::unique_lock lk(s_.mu);
        const auto mine = s_.next_ticket++;
        s_.cv.wait(lk, [&] { return s_.serving == mine; });
    }
    ~Ticket() {
        {
            std::lock_guard lk(s_.mu);
            ++s_.serving;
        }
        s_.cv.notify_all();
    }
    Ticket(const Ticket&) = delete;
    Ticket& operator=(const Ticket&) = delete;

private:
    Service::Session& s_;
};

std::string new_session_id() {
    static std::mutex mu;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lk(mu);
    return fmt::format("{:016x}{:016x}", rng(), rng());
}

}  // namespace

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput:
        case ErrorCode::Parse: return 400;
        case ErrorCode::Security: return 403;
        case ErrorCode::NotFound: return 404;
        case ErrorCode::LimitExceeded: return 413;
        case ErrorCode::Upstream: return 502;
        default: return 500;
    }
}

bool is_session_id(std::string_view id) {
    return id.size() == 32 &&
           std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

bool is_safe_filename(std::string_view name) {
    if (name.empty() || name.size() > 255 || name.front() == '.') return false;
    for (char c : name) {
        if (c == '/' || c == '\\' || c == '\0' || static_cast<unsigned char>(c) < 0x20) return false;
    }
    return name.find("..") == std::string_view::npos;
}

std::string sse_frame(const agents::TraceEvent& e) {
    return "id: " + std::to_string(e.seq) + "\nevent: " + e.kind + "\ndata: " + agents::to_json(e).dump() + "\n\n";
}

Service::Service(std::shared_ptr<const agents::Runtime> runtime, ServiceOptions options)
    : runtime_(std::move(runtime)), options_(std::move(options)) {
    if (!runtime_) throw Error(ErrorCode::Config, "service needs a runtime");
    root_ = runtime_->config().artifact_root;
}

Service::~Service() = default;

void Service::persist(const Session& s) const {
    const auto tmp = s.dir / "session.json.tmp";
    try {
        text::write_file(tmp, agents::to_json(s.state).dump());
        fs::rename(tmp, s.dir / "session.json");
    } catch (const std::exception& e) {
        throw Error(ErrorCode::Storage, "cannot persist session " + s.id + ": " + e.what());
    }
}

std::string Service::create_session() {
    auto s = std::make_shared<Session>();
    s->id = new_session_id();
    s->dir = root_ / s->id;
    s->state.session_id = s->id;
    std::error_code ec;
    fs::create_directories(s->dir, ec);
    if (ec) throw Error(ErrorCode::Storage, "cannot create session directory " + s->dir.string() + ": " + ec.message());
    persist(*s);
    std::lock_guard lk(mutex_);
    sessions_[s->id] = s;
    spdlog::info("session {} created", s->id);
    return s->id;
}

std::shared_ptr<Service::Session> Service::find(const std::string& session_id) const {
    if (!is_session_id(session_id)) throw Error(ErrorCode::NotFound, "unknown session '" + session_id + "'");
    std::lock_guard lk(mutex_);
    if (auto it = sessions_.find(session_id); it != sessions_.end()) return it->second;
    // Sessions persisted by an earlier process.
    const auto file = root_ / session_id / "session.json";
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) throw Error(ErrorCode::NotFound, "unknown session '" + session_id + "'");
    auto s = std::make_shared<Session>();
    s->id = session_id;
    s->dir = file.parent_path();
    try {
        agents::load_session(nlohmann::json::parse(text::read_file(file)), s->state);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Storage, "corrupt session file " + file.string() + ": " + e.what());
    }
    s->state.session_id = session_id;
    s->published = s->state.trace;
    sessions_[session_id] = s;
    return s;
}

bool Service::exists(const std::string& session_id) const {
    try {
        find(session_id);
        return true;
    } catch (const Error&) {
        return false;
    }
}

agents::AgentMessage Service::post_message(const std::string& session_id, const std::string& text) {
    auto s = find(session_id);
    Ticket t(s);
    auto msg = runtime_->run_turn(s->state, text, [&](const agents::TraceEvent& e) { s->publish(e); });
    persist(*s);
    return msg;
}

interp::FileSummary Service::upload_file(const std::string& session_id, const std::string& filename,
                                         const std::string& content) {
    auto s = find(session_id);
    if (!is_safe_filename(filename)) throw Error(ErrorCode::Security, "rejected file name '" + filename + "'");
    if (filename == "session.json" || filename == "session.json.tmp") {
        throw Error(ErrorCode::Security, "reserved file name '" + filename + "'");
    }
    if (content.size() > options_.upload_cap) {
        throw Error(ErrorCode::LimitExceeded, fmt::format("file exceeds the {} byte upload limit", options_.upload_cap));
    }
    Ticket t(s);
    const auto path = interp::confine(s->dir, s->dir / filename);
    text::write_file(path, content);
    auto f = runtime_->register_upload(s->state, filename, [&](const agents::TraceEvent& e) { s->publish(e); });
    persist(*s);
    return f.summary;
}

std::string Service::artifact(const std::string& session_id, const std::string& name) const {
    auto s = find(session_id);
    const auto path = interp::confine(s->dir, s->dir / name);
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::NotFound, "no artifact '" + name + "'");
    return text::read_file(path);
}

std::vector<agents::TraceEvent> Service::events(const std::string& session_id, std::int64_t after) const {
    auto s = find(session_id);
    std::lock_guard lk(s->mu);
    std::vector<agents::TraceEvent> out;
    for (const auto& e : s->published) {
        if (e.seq > after) out.push_back(e);
    }
    return out;
}

std::string Service::trace_jsonl(const std::string& session_id) const {
    auto s = find(session_id);
    std::lock_guard lk(s->mu);
    return agents::trace_jsonl(s->published);
}

bool Service::wait_for_events(const std::string& session_id, std::int64_t after,
                              std::chrono::milliseconds timeout) const {
    auto s = find(session_id);
    std::unique_lock lk(s->mu);
    s->cv.wait_for(lk, timeout, [&] {
        return !s->active() || (!s->published.empty() && s->published.back().seq > after);
    });
    return s->active();
}

namespace {

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    res.status = http_status(code);
    res.set_content(nlohmann::json{{"error", std::string(to_string(code))}, {"message", message}}.dump(),
                    "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        if (http_status(e.code()) >= 500) spdlog::error("request failed: {}", e.what());
        send_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
        spdlog::error("request failed: {}", e.what());
        send_error(res, ErrorCode::Internal, e.what());
    }
}

}  // namespace

void Service::register_routes(httplib::Server& server) {
    // Multipart framing adds a little on top of the file itself.
    server.set_payload_max_length(options_.upload_cap + 64 * 1024);

    server.Post("/sessions", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            auto id = create_session();
            res.status = 201;
            res.set_content(nlohmann::json{{"session_id", id}}.dump(), "application/json");
        });
    });

    server.Post(R"(/sessions/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::string text = req.body;
            if (req.get_header_value("Content-Type").find("application/json") != std::string::npos) {
                auto j = nlohmann::json::parse(req.body, nullptr, false);
                if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string()) {
                    throw Error(ErrorCode::InvalidInput, "expected a JSON object with a string 'text'");
                }
                text = j["text"].get<std::string>();
            }
            auto msg = post_message(req.matches[1], text);
            res.set_content(nlohmann::json{{"message", agents::to_json(msg)}}.dump(), "application/json");
        });
    });

    server.Post(R"(/sessions/([^/]+)/files)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!req.has_file("file")) throw Error(ErrorCode::InvalidInput, "expected a multipart field named 'file'");
            auto file = req.get_file_value("file");
            auto summary = upload_file(req.matches[1], file.filename, file.content);
            res.status = 201;
            res.set_content(interp::to_json(summary).dump(), "application/json");
        });
    });

    server.Get(R"(/sessions/([^/]+)/artifacts/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::string name = req.matches[2];
            auto body = artifact(req.matches[1], name);
            auto type = "application/octet-stream";
            if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") type = "text/csv";
            if (name.size() > 5 && name.substr(name.size() - 5) == ".json") type = "application/json";
            res.set_content(body, type);
        });
    });

    server.Get(R"(/sessions/([^/]+)/trace)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { res.set_content(trace_jsonl(req.matches[1]), "application/x-ndjson"); });
    });

    server.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            find(id);
            std::int64_t after = 0;
            auto from = req.has_param("after") ? req.get_param_value("after") : req.get_header_value("Last-Event-ID");
            if (!from.empty()) {
                try {
                    after = std::stoll(from);
                } catch (const std::exception&) {
                    throw Error(ErrorCode::InvalidInput, "bad event cursor '" + from + "'");
                }
            }
            auto cursor = std::make_shared<std::int64_t>(after);
            res.set_header("Cache-Control", "no-cache");
            // Streams what is already published, then follows any queued or
            // running turn until it completes.
            res.set_chunked_content_provider("text/event-stream", [this, id, cursor](std::size_t, httplib::DataSink& sink) {
                for (const auto& e : events(id, *cursor)) {
                    auto frame = sse_frame(e);
                    if (!sink.write(frame.data(), frame.size())) return false;
                    *cursor = e.seq;
                }
                bool active = wait_for_events(id, *cursor, std::chrono::milliseconds(500));
                if (!active && events(id, *cursor).empty()) sink.done();
                return true;
            });
        });
    });
}

}  // namespace kgqa::service
