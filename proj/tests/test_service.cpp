#include <doctest.h>

#include <future>
#include <thread>

#include <httplib.h>

#include "kgqa/agents/runtime.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/service/service.hpp"
#include "support.hpp"

using namespace kgqa;
using namespace kgqa::service;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    testing::TempDir dir;
    std::unique_ptr<app::AppContext> ctx;
    std::shared_ptr<agents::Runtime> runtime;
    std::unique_ptr<Service> svc;

    explicit Fixture(const std::string& cassette, std::size_t cap = 1024) {
        ctx = app::build_context(testing::fixture_config(cassette, dir.path()));
        runtime = std::make_shared<agents::Runtime>(ctx->runtime_config(), ctx->completer());
        svc = std::make_unique<Service>(runtime, ServiceOptions{cap});
    }
};

/// Service routes on a loopback port for the lifetime of the object.
struct Loopback {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit Loopback(Service& svc) {
        svc.register_routes(server);
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~Loopback() {
        server.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        return c;
    }
};

}  // namespace

TEST_SUITE("service") {

TEST_CASE("helpers") {
    CHECK(is_session_id("0123456789abcdef0123456789abcdef"));
    CHECK_FALSE(is_session_id("0123456789ABCDEF0123456789abcdef"));
    CHECK_FALSE(is_session_id("../etc"));
    CHECK(is_safe_filename("spectra.mgf"));
    for (auto bad : {"", "../x", "a/b", "a\\b", ".hidden", "x..y", "tab\there"}) CHECK_FALSE(is_safe_filename(bad));
    CHECK(http_status(ErrorCode::Security) == 403);
    CHECK(http_status(ErrorCode::NotFound) == 404);
    CHECK(http_status(ErrorCode::LimitExceeded) == 413);
    CHECK(http_status(ErrorCode::Storage) == 500);
    agents::TraceEvent e;
    e.seq = 3;
    e.kind = "llm_call";
    auto f = sse_frame(e);
    CHECK(f.rfind("id: 3\nevent: llm_call\ndata: {", 0) == 0);
    CHECK(f.substr(f.size() - 2) == "\n\n");
}

TEST_CASE("sessions run turns, keep artifacts and persist") {
    Fixture fx("followup");
    auto id = fx.svc->create_session();
    CHECK(is_session_id(id));
    CHECK(fs::exists(fx.dir / id / "session.json"));
    auto a = fx.svc->post_message(id, testing::script_question("followup", 0));
    CHECK(a.text().find("Result (3 rows") != std::string::npos);
    auto csv = fx.svc->artifact(id, "1-results.csv");
    CHECK(csv == text::read_file(fx.dir / id / "1-results.csv"));
    CHECK_FALSE(fx.svc->events(id).empty());
    CHECK(fx.svc->events(id, 5).front().seq == 6);

    // a second service over the same root reloads the session from disk
    Service reloaded(fx.runtime, ServiceOptions{});
    CHECK(reloaded.exists(id));
    CHECK(reloaded.trace_jsonl(id) == fx.svc->trace_jsonl(id));
    auto b = reloaded.post_message(id, testing::script_question("followup", 1));
    CHECK(b.text().find("2-chart.json") != std::string::npos);
}

TEST_CASE("unknown sessions, traversal and limits") {
    Fixture fx("fig2a", 16);
    auto id = fx.svc->create_session();
    auto code_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Internal;
    };
    CHECK(code_of([&] { fx.svc->post_message("0123456789abcdef0123456789abcdef", "q"); }) == ErrorCode::NotFound);
    CHECK(code_of([&] { fx.svc->events("not-an-id"); }) == ErrorCode::NotFound);
    CHECK(code_of([&] { fx.svc->upload_file(id, "../escape.txt", "x"); }) == ErrorCode::Security);
    CHECK(code_of([&] { fx.svc->upload_file(id, "session.json", "{}"); }) == ErrorCode::Security);
    CHECK(code_of([&] { fx.svc->upload_file(id, "big.txt", std::string(17, 'x')); }) == ErrorCode::LimitExceeded);
    CHECK(code_of([&] { fx.svc->artifact(id, "../../x"); }) == ErrorCode::Security);
    CHECK(code_of([&] { fx.svc->artifact(id, "missing.csv"); }) == ErrorCode::NotFound);
    CHECK_FALSE(fs::exists(fx.dir / id / ".." / "escape.txt"));
    auto s = fx.svc->upload_file(id, "notes.txt", "a\nb\n");
    CHECK(s.line_count == 2u);
}

TEST_CASE("turns within a session run in arrival order") {
    Fixture fx("followup");
    auto id = fx.svc->create_session();
    auto first = std::async(std::launch::async, [&] { return fx.svc->post_message(id, testing::script_question("followup", 0)); });
    // wait until the first turn is running before queueing the second
    while (fx.svc->events(id).empty()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    auto second = std::async(std::launch::async, [&] { return fx.svc->post_message(id, testing::script_question("followup", 1)); });
    auto a = first.get();
    auto b = second.get();
    CHECK(a.turn == 1);
    CHECK(b.turn == 2);
    CHECK(b.kind == agents::MessageKind::FinalAnswer);  // a replay miss would mean the order was wrong
    CHECK(fx.ctx->cassette->remaining() == 0u);
}

TEST_CASE("unwritable artifact roots fail session creation") {
    testing::TempDir dir;
    text::write_file(dir / "blocker", "not a directory");
    auto ctx = app::build_context(testing::fixture_config("fig2a", dir / "blocker" / "root"));
    auto rt = std::make_shared<agents::Runtime>(ctx->runtime_config(), ctx->completer());
    Service svc(rt, ServiceOptions{});
    try {
        svc.create_session();
        FAIL("expected a storage error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Storage);
    }
    Loopback lb(svc);
    auto c = lb.client();
    auto r = c.Post("/sessions");
    REQUIRE(r);
    CHECK(r->status == 500);
    CHECK(nlohmann::json::parse(r->body)["error"] == "storage_error");
}

TEST_CASE("REST routes over loopback") {
    Fixture fx("fig2a", 64);
    Loopback lb(*fx.svc);
    auto c = lb.client();

    auto created = c.Post("/sessions");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = nlohmann::json::parse(created->body)["session_id"];
    const std::string base = "/sessions/" + id;

    CHECK(c.Post("/sessions/0123456789abcdef0123456789abcdef/messages", "q", "text/plain")->status == 404);
    CHECK(c.Get("/sessions/nope/trace")->status == 404);

    nlohmann::json body{{"text", testing::script_question("fig2a")}};
    auto posted = c.Post(base + "/messages", body.dump(), "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 200);
    auto msg = nlohmann::json::parse(posted->body)["message"];
    CHECK(msg["body"]["text"].get<std::string>().find("Result: metaboliteCount = 3") != std::string::npos);
    CHECK(c.Post(base + "/messages", "{\"txt\": 1}", "application/json")->status == 400);

    auto trace = c.Get(base + "/trace");
    REQUIRE(trace);
    CHECK(trace->get_header_value("Content-Type") == "application/x-ndjson");
    CHECK(trace->body == fx.svc->trace_jsonl(id));

    auto sse = c.Get(base + "/events?after=0");
    REQUIRE(sse);
    CHECK(sse->get_header_value("Content-Type") == "text/event-stream");
    std::string expected;
    for (const auto& e : fx.svc->events(id)) expected += sse_frame(e);
    CHECK(sse->body == expected);
    auto tail = c.Get(base + "/events?after=" + std::to_string(fx.svc->events(id).back().seq - 1));
    CHECK(tail->body.find("event: answer") != std::string::npos);
    CHECK(tail->body.find("event: llm_call") == std::string::npos);

    // uploads change the entry prompt, so they come after the recorded turn
    httplib::MultipartFormDataItems bad{{"file", "x", "../evil.txt", "text/plain"}};
    CHECK(c.Post(base + "/files", bad)->status == 403);
    httplib::MultipartFormDataItems big{{"file", std::string(65, 'x'), "big.txt", "text/plain"}};
    CHECK(c.Post(base + "/files", big)->status == 413);
    httplib::MultipartFormDataItems good{{"file", "BEGIN IONS\nEND IONS\n", "one.mgf", "text/plain"}};
    auto up = c.Post(base + "/files", good);
    REQUIRE(up);
    CHECK(up->status == 201);
    CHECK(nlohmann::json::parse(up->body)["spectrum_count"] == 1);
    auto art = c.Get(base + "/artifacts/one.mgf");
    REQUIRE(art);
    CHECK(art->body == "BEGIN IONS\nEND IONS\n");
    CHECK(c.Get(base + "/artifacts/..%2F..%2Fetc%2Fpasswd")->status == 403);
    CHECK(c.Get(base + "/artifacts/none.csv")->status == 404);
}

}  // TEST_SUITE
