#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "kgqa/core/http.hpp"
#include "kgqa/llm/chat.hpp"

namespace kgqa::llm {

class Provider {
public:
    virtual ~Provider() = default;
    /// Throws Error(Upstream, retriable) for transient failures.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// OpenAI-compatible chat-completions API.
class ChatCompletionsProvider final : public Provider {
public:
    ChatCompletionsProvider(std::string base_url, std::string api_key, std::shared_ptr<http::Transport> transport);

    /// Reads KGQA_LLM_BASE_URL (default https://api.openai.com/v1) and
    /// KGQA_LLM_API_KEY, falling back to OPENAI_API_KEY.
    static std::shared_ptr<ChatCompletionsProvider> from_env(std::shared_ptr<http::Transport> transport);

    ChatResponse complete(const ChatRequest& request) override;

private:
    std::string base_url_;
    std::string api_key_;
    std::shared_ptr<http::Transport> transport_;
};

/// Serves canned responses per request purpose, in order. Used to author
/// cassettes and in unit tests. Usage comes from the token estimator.
class ScriptedProvider final : public Provider {
public:
    void push(const std::string& purpose, std::string response);
    ChatResponse complete(const ChatRequest& request) override;
    std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> scripts_;
};

}  // namespace kgqa::llm
