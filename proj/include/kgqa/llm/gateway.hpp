#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "kgqa/llm/cassette.hpp"
#include "kgqa/llm/chat.hpp"
#include "kgqa/llm/provider.hpp"

namespace kgqa::llm {

enum class Mode { Live, Record, Replay };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

struct GatewayOptions {
    Mode mode = Mode::Replay;
    int max_retries = 2;
    std::chrono::milliseconds initial_backoff{500};
    RateTable rates;
    /// Injected so tests do not sleep.
    std::function<void(std::chrono::milliseconds)> sleeper;
    /// Record mode: rewrite this file after every new exchange.
    std::optional<std::filesystem::path> record_path;
};

/// Single entry point for every LLM call made by the pipeline.
///
/// Replay mode answers only from the cassette and never touches the
/// provider; a miss is a hard error naming the fingerprint.
class Gateway {
public:
    Gateway(GatewayOptions options, std::shared_ptr<Provider> provider, std::shared_ptr<Cassette> cassette);

    ChatResponse complete(const ChatRequest& request);

    Mode mode() const { return options_.mode; }
    std::int64_t completions() const { return completions_.load(); }
    const std::shared_ptr<Cassette>& cassette() const { return cassette_; }

private:
    ChatResponse call_provider(const ChatRequest& request);

    GatewayOptions options_;
    std::shared_ptr<Provider> provider_;
    std::shared_ptr<Cassette> cassette_;
    std::atomic<std::int64_t> completions_{0};
    std::mutex record_mutex_;
};

}  // namespace kgqa::llm
