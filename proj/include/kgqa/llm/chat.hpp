#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace kgqa::llm {

struct Message {
    std::string role;  // system | user | assistant
    std::string text;
    bool operator==(const Message&) const = default;
};

struct ChatRequest {
    std::string model;
    std::vector<Message> messages;
    double temperature = 0.0;
    /// Which pipeline step issued the call (entry, validator, generate, ...).
    /// Used for tracing and scripted providers; not part of the fingerprint.
    std::string purpose;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    double estimated_cost = 0.0;

    std::int64_t total() const { return prompt_tokens + completion_tokens; }
    TokenUsage& operator+=(const TokenUsage& o);
    bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
    std::string text;
    TokenUsage usage;
};

nlohmann::json to_json(const ChatRequest& r);
ChatRequest request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TokenUsage& u);
TokenUsage usage_from_json(const nlohmann::json& j);

/// Default estimator: ceil(bytes / 3). Over-counts common BPE tokenizers,
/// which keeps budget checks conservative.
std::int64_t estimate_tokens(std::string_view text);

using TokenCounter = std::function<std::int64_t(std::string_view)>;

inline constexpr std::int64_t kResultTokenBudget = 6000;

/// True iff count(query) + count(question) + count(rows) <= limit.
bool within_result_budget(std::string_view query, std::string_view question, std::string_view result_rows,
                          const TokenCounter& counter = estimate_tokens, std::int64_t limit = kResultTokenBudget);

/// Per-model price per token. Unknown models cost zero.
struct RateTable {
    struct Rate {
        double input = 0.0;
        double output = 0.0;
    };
    std::map<std::string, Rate> rates;

    double cost(const std::string& model, std::int64_t prompt_tokens, std::int64_t completion_tokens) const;
};

/// Running totals for one session.
class UsageLedger {
public:
    void record(const TokenUsage& usage);
    TokenUsage totals() const;
    std::int64_t calls() const;
    void restore(const TokenUsage& totals, std::int64_t calls);

private:
    mutable std::mutex mutex_;
    TokenUsage totals_;
    std::int64_t calls_ = 0;
};

}  // namespace kgqa::llm
