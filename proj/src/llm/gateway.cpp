#include "kgqa/llm/gateway.hpp"

#include <thread>

#include <spdlog/spdlog.h>

#include "kgqa/core/error.hpp"

namespace kgqa::llm {

Mode parse_mode(const std::string& s) {
    if (s == "live") return Mode::Live;
    if (s == "record") return Mode::Record;
    if (s == "replay") return Mode::Replay;
    throw Error(ErrorCode::Config, "unknown LLM mode '" + s + "' (expected live, record or replay)");
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Live: return "live";
        case Mode::Record: return "record";
        case Mode::Replay: return "replay";
    }
    return "?";
}

Gateway::Gateway(GatewayOptions options, std::shared_ptr<Provider> provider, std::shared_ptr<Cassette> cassette)
    : options_(std::move(options)), provider_(std::move(provider)), cassette_(std::move(cassette)) {
    if (options_.mode == Mode::Replay && !cassette_) throw Error(ErrorCode::Config, "replay mode needs a cassette");
    if (options_.mode != Mode::Replay && !provider_) throw Error(ErrorCode::Config, "live/record mode needs a provider");
    if (options_.mode == Mode::Record && !cassette_) cassette_ = std::make_shared<Cassette>();
    if (!options_.sleeper) options_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatResponse Gateway::call_provider(const ChatRequest& request) {
    auto delay = options_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            return provider_->complete(request);
        } catch (const Error& e) {
            if (!e.retriable() || attempt >= options_.max_retries) throw;
            spdlog::warn("LLM call ({}) failed, retry {}/{} in {} ms: {}", request.purpose, attempt + 1,
                         options_.max_retries, delay.count(), e.what());
            options_.sleeper(delay);
            delay *= 2;
        }
    }
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    const std::string fp = fingerprint(request);
    ChatResponse out;
    if (options_.mode == Mode::Replay) {
        auto entry = cassette_->take(fp);
        if (!entry) {
            throw Error(ErrorCode::ReplayMiss,
                        "cassette has no unconsumed entry for fingerprint " + fp + " (purpose " + request.purpose + ")");
        }
        out.text = entry->response;
        out.usage = entry->usage;
    } else {
        out = call_provider(request);
        if (options_.mode == Mode::Record) {
            std::lock_guard lock(record_mutex_);
            cassette_->append({fp, request, out.text, TokenUsage{out.usage.prompt_tokens, out.usage.completion_tokens, 0}});
            if (options_.record_path) cassette_->save(*options_.record_path);
        }
    }
    out.usage.estimated_cost =
        options_.rates.cost(request.model, out.usage.prompt_tokens, out.usage.completion_tokens);
    ++completions_;
    return out;
}

}  // namespace kgqa::llm
