#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kgqa/llm/chat.hpp"

namespace kgqa::llm {

/// Hex FNV-1a/64 over the canonical JSON of {model, messages}.
std::string fingerprint(const ChatRequest& request);

struct CassetteEntry {
    std::string fingerprint;
    ChatRequest request;
    std::string response;
    TokenUsage usage;
};

/// Recorded exchanges, stored as JSON lines. Replay consumes entries by
/// fingerprint; repeated identical requests are served in recording order.
class Cassette {
public:
    Cassette() = default;
    Cassette(Cassette&& other) noexcept;
    Cassette& operator=(Cassette&&) = delete;
    static Cassette load(const std::filesystem::path& path);

    void append(CassetteEntry entry);
    /// Next unconsumed entry for this fingerprint, if any.
    std::optional<CassetteEntry> take(const std::string& fp);

    const std::vector<CassetteEntry>& entries() const { return entries_; }
    std::size_t remaining() const;

    std::string serialize() const;
    void save(const std::filesystem::path& path) const;

private:
    mutable std::mutex mutex_;
    std::vector<CassetteEntry> entries_;
    std::map<std::string, std::deque<std::size_t>> pending_;
};

}  // namespace kgqa::llm
