#include "kgqa/llm/provider.hpp"

#include <cstdlib>

#include <spdlog/spdlog.h>

#include "kgqa/core/error.hpp"

namespace kgqa::llm {

namespace {
std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::move(fallback);
}
}  // namespace

ChatCompletionsProvider::ChatCompletionsProvider(std::string base_url, std::string api_key,
                                                 std::shared_ptr<http::Transport> transport)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), transport_(std::move(transport)) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::shared_ptr<ChatCompletionsProvider> ChatCompletionsProvider::from_env(
    std::shared_ptr<http::Transport> transport) {
    auto key = env_or("KGQA_LLM_API_KEY", env_or("OPENAI_API_KEY", ""));
    if (key.empty()) throw Error(ErrorCode::Config, "live LLM mode needs KGQA_LLM_API_KEY or OPENAI_API_KEY");
    return std::make_shared<ChatCompletionsProvider>(env_or("KGQA_LLM_BASE_URL", "https://api.openai.com/v1"),
                                                     key, std::move(transport));
}

ChatResponse ChatCompletionsProvider::complete(const ChatRequest& request) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : request.messages) msgs.push_back({{"role", m.role}, {"content", m.text}});
    nlohmann::json body{{"model", request.model}, {"messages", msgs}, {"temperature", request.temperature}};

    http::Request req;
    req.method = "POST";
    req.url = base_url_ + "/chat/completions";
    req.content_type = "application/json";
    req.body = body.dump();
    req.headers = {{"Authorization", "Bearer " + api_key_}};
    req.timeout = std::chrono::seconds(120);
    auto res = transport_->send(req);
    if (!res.ok()) {
        bool retriable = res.status == 429 || res.status >= 500;
        throw Error(ErrorCode::Upstream, "LLM provider returned HTTP " + std::to_string(res.status), retriable);
    }
    try {
        auto j = nlohmann::json::parse(res.body);
        ChatResponse out;
        out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            out.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
            out.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Upstream, std::string("malformed provider response: ") + e.what());
    }
}

void ScriptedProvider::push(const std::string& purpose, std::string response) {
    std::lock_guard lock(mutex_);
    scripts_[purpose].push_back(std::move(response));
}

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
    std::string text;
    {
        std::lock_guard lock(mutex_);
        auto it = scripts_.find(request.purpose);
        if (it == scripts_.end() || it->second.empty()) {
            throw Error(ErrorCode::Precondition, "no scripted response left for purpose '" + request.purpose + "'");
        }
        text = std::move(it->second.front());
        it->second.pop_front();
    }
    ChatResponse out;
    std::int64_t prompt = 0;
    for (const auto& m : request.messages) prompt += estimate_tokens(m.text);
    out.usage.prompt_tokens = prompt;
    out.usage.completion_tokens = estimate_tokens(text);
    out.text = std::move(text);
    return out;
}

std::size_t ScriptedProvider::remaining() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [k, q] : scripts_) n += q.size();
    return n;
}

}  // namespace kgqa::llm
