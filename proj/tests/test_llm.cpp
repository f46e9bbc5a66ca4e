#include <doctest.h>

#include <cstdlib>

#include "kgqa/core/error.hpp"
#include "kgqa/core/http.hpp"
#include "kgqa/llm/cassette.hpp"
#include "kgqa/llm/chat.hpp"
#include "kgqa/llm/gateway.hpp"
#include "kgqa/llm/provider.hpp"
#include "support.hpp"

using namespace kgqa;
using namespace kgqa::llm;

namespace {

ChatRequest req(const std::string& text, const std::string& purpose = "entry") {
    return ChatRequest{"gpt-4o", {{"user", text}}, 0.0, purpose};
}

class FlakyProvider final : public Provider {
public:
    explicit FlakyProvider(int failures, bool retriable = true) : failures_(failures), retriable_(retriable) {}
    ChatResponse complete(const ChatRequest& r) override {
        ++calls;
        if (failures_-- > 0) throw Error(ErrorCode::Upstream, "boom", retriable_);
        return {"echo:" + r.messages.back().text, {10, 2, 0}};
    }
    int calls = 0;

private:
    int failures_;
    bool retriable_;
};

}  // namespace

TEST_SUITE("llm") {

TEST_CASE("fingerprint covers model and messages only") {
    auto a = req("hello", "entry");
    auto b = req("hello", "validator");
    CHECK(fingerprint(a) == fingerprint(b));
    CHECK(fingerprint(a).size() == 16u);
    auto c = req("hello!");
    CHECK(fingerprint(a) != fingerprint(c));
    auto d = a;
    d.model = "other";
    CHECK(fingerprint(a) != fingerprint(d));
}

TEST_CASE("token estimate and budget boundary") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("a") == 1);
    CHECK(estimate_tokens("abc") == 1);
    CHECK(estimate_tokens("abcd") == 2);
    const std::string rows(3 * 5998, 'x');  // 5998 tokens
    CHECK(within_result_budget("q", "", rows));          // 5999
    CHECK(within_result_budget("q", "q", rows));         // 6000
    CHECK_FALSE(within_result_budget("q", "q", rows + "xxx"));  // 6001
}

TEST_CASE("rates and ledger") {
    RateTable rates;
    rates.rates["m"] = {1e-6, 2e-6};
    CHECK(rates.cost("m", 1000, 500) == doctest::Approx(0.002));
    CHECK(rates.cost("unknown", 1000, 500) == 0.0);
    UsageLedger ledger;
    ledger.record({10, 5, 0.1});
    ledger.record({1, 1, 0.01});
    CHECK(ledger.calls() == 2);
    CHECK(ledger.totals().total() == 17);
    CHECK(ledger.totals().estimated_cost == doctest::Approx(0.11));
}

TEST_CASE("cassette serves repeated requests in recording order and round trips") {
    testing::TempDir dir;
    Cassette c;
    auto r = req("same");
    c.append({fingerprint(r), r, "first", {1, 1, 0}});
    c.append({fingerprint(r), r, "second", {1, 1, 0}});
    c.save(dir / "c.jsonl");
    auto loaded = Cassette::load(dir / "c.jsonl");
    CHECK(loaded.serialize() == c.serialize());
    CHECK(loaded.take(fingerprint(r))->response == "first");
    CHECK(loaded.take(fingerprint(r))->response == "second");
    CHECK_FALSE(loaded.take(fingerprint(r)));
    CHECK(loaded.remaining() == 0u);
}

TEST_CASE("cassette rejects malformed lines with the line number") {
    testing::TempDir dir;
    text::write_file(dir / "bad.jsonl", "{\"fingerprint\":\"x\"}\nnot json\n");
    try {
        Cassette::load(dir / "bad.jsonl");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":1: ") != std::string::npos);
    }
}

TEST_CASE("replay never calls the provider and misses are hard errors") {
    auto cassette = std::make_shared<Cassette>();
    auto r = req("known");
    cassette->append({fingerprint(r), r, "answer", {3, 1, 0}});
    auto provider = std::make_shared<FlakyProvider>(0);
    GatewayOptions opts;
    opts.mode = Mode::Replay;
    opts.rates.rates["gpt-4o"] = {1.0, 2.0};
    Gateway gw(opts, provider, cassette);
    auto out = gw.complete(r);
    CHECK(out.text == "answer");
    CHECK(out.usage.estimated_cost == doctest::Approx(5.0));
    try {
        gw.complete(req("unknown"));
        FAIL("expected a replay miss");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ReplayMiss);
        CHECK(std::string(e.what()).find(fingerprint(req("unknown"))) != std::string::npos);
    }
    CHECK(provider->calls == 0);
    CHECK(gw.completions() == 1);
}

TEST_CASE("retriable failures back off and retry") {
    auto provider = std::make_shared<FlakyProvider>(2);
    std::vector<long> sleeps;
    GatewayOptions opts;
    opts.mode = Mode::Live;
    opts.sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); };
    Gateway gw(opts, provider, nullptr);
    CHECK(gw.complete(req("x")).text == "echo:x");
    CHECK(provider->calls == 3);
    CHECK(sleeps == std::vector<long>{500, 1000});

    auto hopeless = std::make_shared<FlakyProvider>(5);
    Gateway gw2(opts, hopeless, nullptr);
    CHECK_THROWS_AS(gw2.complete(req("x")), Error);
    CHECK(hopeless->calls == 3);

    auto fatal = std::make_shared<FlakyProvider>(1, false);
    Gateway gw3(opts, fatal, nullptr);
    CHECK_THROWS_AS(gw3.complete(req("x")), Error);
    CHECK(fatal->calls == 1);
}

TEST_CASE("record mode writes every exchange") {
    testing::TempDir dir;
    GatewayOptions opts;
    opts.mode = Mode::Record;
    opts.record_path = dir / "rec.jsonl";
    Gateway gw(opts, std::make_shared<FlakyProvider>(0), nullptr);
    gw.complete(req("a"));
    gw.complete(req("b"));
    auto c = Cassette::load(dir / "rec.jsonl");
    REQUIRE(c.entries().size() == 2u);
    CHECK(c.entries()[1].response == "echo:b");
    CHECK(c.entries()[1].request.purpose == "entry");
}

TEST_CASE("mode names") {
    CHECK(parse_mode("replay") == Mode::Replay);
    CHECK(to_string(Mode::Record) == "record");
    CHECK_THROWS_AS(parse_mode("offline"), Error);
    CHECK_THROWS_AS(Gateway(GatewayOptions{}, nullptr, nullptr), Error);
}

TEST_CASE("chat completions provider request and response") {
    auto transport = std::make_shared<http::FunctionTransport>([](const http::Request&) {
        http::Response r;
        r.status = 200;
        r.content_type = "application/json";
        r.body = R"({"choices":[{"message":{"role":"assistant","content":"hi"}}],"usage":{"prompt_tokens":7,"completion_tokens":2}})";
        return r;
    });
    ChatCompletionsProvider p("https://llm.example/v1", "secret", transport);
    auto out = p.complete(req("hello"));
    CHECK(out.text == "hi");
    CHECK(out.usage.prompt_tokens == 7);
    auto sent = transport->requests().at(0);
    CHECK(sent.url == "https://llm.example/v1/chat/completions");
    auto body = nlohmann::json::parse(sent.body);
    CHECK(body["model"] == "gpt-4o");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["messages"][0]["content"] == "hello");
}

TEST_CASE("chat completions provider error classes") {
    int status = 500;
    std::string body = "oops";
    auto transport = std::make_shared<http::FunctionTransport>([&](const http::Request&) {
        http::Response r;
        r.status = status;
        r.body = body;
        return r;
    });
    ChatCompletionsProvider p("https://llm.example/v1", "k", transport);
    try {
        p.complete(req("x"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.retriable());
    }
    status = 400;
    try {
        p.complete(req("x"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK_FALSE(e.retriable());
    }
    status = 200;
    body = "{}";
    CHECK_THROWS_AS(p.complete(req("x")), Error);
}

TEST_CASE("credentials come from the environment") {
    auto transport = std::make_shared<http::FailingTransport>();
    ::unsetenv("KGQA_LLM_API_KEY");
    ::unsetenv("OPENAI_API_KEY");
    CHECK_THROWS_AS(ChatCompletionsProvider::from_env(transport), Error);
    ::setenv("OPENAI_API_KEY", "fallback", 1);
    CHECK(ChatCompletionsProvider::from_env(transport) != nullptr);
    ::unsetenv("OPENAI_API_KEY");
}

TEST_CASE("scripted provider serves per purpose") {
    ScriptedProvider p;
    p.push("entry", "a");
    p.push("entry", "b");
    p.push("validator", "v");
    CHECK(p.complete(req("q", "validator")).text == "v");
    CHECK(p.complete(req("q", "entry")).text == "a");
    CHECK(p.remaining() == 1u);
    CHECK(p.complete(req("q", "entry")).usage.completion_tokens == 1);
    try {
        p.complete(req("q", "entry"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Precondition);
    }
}

}  // TEST_SUITE
