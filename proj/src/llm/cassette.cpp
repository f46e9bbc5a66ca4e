#include "kgqa/llm/cassette.hpp"

#include <cstdio>

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::llm {

std::string fingerprint(const ChatRequest& request) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : request.messages) msgs.push_back({{"content", m.text}, {"role", m.role}});
    const std::string canon = nlohmann::json{{"messages", msgs}, {"model", request.model}}.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Cassette::Cassette(Cassette&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    entries_ = std::move(other.entries_);
    pending_ = std::move(other.pending_);
}

Cassette Cassette::load(const std::filesystem::path& path) {
    Cassette c;
    const std::string body = text::read_file(path);
    std::size_t line_no = 0, pos = 0;
    while (pos < body.size()) {
        auto nl = body.find('\n', pos);
        std::string line = body.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? body.size() : nl + 1;
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            CassetteEntry e;
            e.request = request_from_json(j.at("request"));
            e.fingerprint = j.at("fingerprint").get<std::string>();
            e.response = j.at("response").get<std::string>();
            e.usage = usage_from_json(j.at("usage"));
            c.append(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return c;
}

void Cassette::append(CassetteEntry entry) {
    std::lock_guard lock(mutex_);
    pending_[entry.fingerprint].push_back(entries_.size());
    entries_.push_back(std::move(entry));
}

std::optional<CassetteEntry> Cassette::take(const std::string& fp) {
    std::lock_guard lock(mutex_);
    auto it = pending_.find(fp);
    if (it == pending_.end() || it->second.empty()) return std::nullopt;
    auto idx = it->second.front();
    it->second.pop_front();
    return entries_[idx];
}

std::size_t Cassette::remaining() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [fp, q] : pending_) n += q.size();
    return n;
}

std::string Cassette::serialize() const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& e : entries_) {
        nlohmann::json j{{"fingerprint", e.fingerprint},
                         {"request", to_json(e.request)},
                         {"response", e.response},
                         {"usage", to_json(e.usage)}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

void Cassette::save(const std::filesystem::path& path) const {
    text::write_file(path, serialize());
}

}  // namespace kgqa::llm
