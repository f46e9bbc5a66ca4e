#include "kgqa/llm/chat.hpp"

#include "kgqa/core/error.hpp"

namespace kgqa::llm {

TokenUsage& TokenUsage::operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    estimated_cost += o.estimated_cost;
    return *this;
}

nlohmann::json to_json(const ChatRequest& r) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : r.messages) msgs.push_back({{"role", m.role}, {"content", m.text}});
    return {{"model", r.model}, {"messages", msgs}, {"temperature", r.temperature}, {"purpose", r.purpose}};
}

ChatRequest request_from_json(const nlohmann::json& j) {
    ChatRequest r;
    r.model = j.at("model").get<std::string>();
    for (const auto& m : j.at("messages")) {
        r.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    }
    r.temperature = j.value("temperature", 0.0);
    r.purpose = j.value("purpose", "");
    return r;
}

nlohmann::json to_json(const TokenUsage& u) {
    return {{"prompt_tokens", u.prompt_tokens},
            {"completion_tokens", u.completion_tokens},
            {"estimated_cost", u.estimated_cost}};
}

TokenUsage usage_from_json(const nlohmann::json& j) {
    TokenUsage u;
    u.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
    u.completion_tokens = j.value("completion_tokens", std::int64_t{0});
    u.estimated_cost = j.value("estimated_cost", 0.0);
    if (u.prompt_tokens < 0 || u.completion_tokens < 0) throw Error(ErrorCode::Parse, "negative token usage");
    return u;
}

std::int64_t estimate_tokens(std::string_view text) {
    return static_cast<std::int64_t>((text.size() + 2) / 3);
}

bool within_result_budget(std::string_view query, std::string_view question, std::string_view result_rows,
                          const TokenCounter& counter, std::int64_t limit) {
    return counter(query) + counter(question) + counter(result_rows) <= limit;
}

double RateTable::cost(const std::string& model, std::int64_t prompt_tokens, std::int64_t completion_tokens) const {
    auto it = rates.find(model);
    if (it == rates.end()) return 0.0;
    return static_cast<double>(prompt_tokens) * it->second.input +
           static_cast<double>(completion_tokens) * it->second.output;
}

void UsageLedger::record(const TokenUsage& usage) {
    std::lock_guard lock(mutex_);
    totals_ += usage;
    ++calls_;
}

TokenUsage UsageLedger::totals() const {
    std::lock_guard lock(mutex_);
    return totals_;
}

std::int64_t UsageLedger::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

void UsageLedger::restore(const TokenUsage& totals, std::int64_t calls) {
    std::lock_guard lock(mutex_);
    totals_ = totals;
    calls_ = calls;
}

}  // namespace kgqa::llm
