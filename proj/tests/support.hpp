#pragma once

// Helpers shared by the test binaries: fixture paths, scratch directories
// and contexts over the bundled fixture configuration.

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <json.hpp>

#include "kgqa/app/config.hpp"
#include "kgqa/core/text.hpp"
#include "kgqa/sparql/endpoint.hpp"

namespace kgqa::testing {

inline std::filesystem::path source_dir() { return KGQA_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "fixtures" / rel; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("kgqa-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::permissions(path_, std::filesystem::perms::owner_all, std::filesystem::perm_options::add, ec);
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

/// The fixture config with `cassette` (a name under fixtures/cassettes) and
/// artifacts redirected to `artifact_root`.
inline app::AppConfig fixture_config(const std::string& cassette, const std::filesystem::path& artifact_root,
                                     const std::string& file = "fixture.json") {
    const auto cfg_path = fixture("config/" + file);
    auto j = nlohmann::json::parse(text::read_file(cfg_path));
    j["cassette"] = "../cassettes/" + cassette + ".jsonl";
    j["artifact_root"] = artifact_root.string();
    return app::config_from_json(j, cfg_path.parent_path());
}

/// Counts SELECT calls on the wrapped endpoint.
class CountingEndpoint final : public sparql::Endpoint {
public:
    explicit CountingEndpoint(std::shared_ptr<sparql::Endpoint> inner) : inner_(std::move(inner)) {}
    sparql::ResultSet select(const std::string& query) override {
        ++calls_;
        return inner_->select(query);
    }
    std::string describe() const override { return inner_->describe(); }
    int calls() const { return calls_.load(); }

private:
    std::shared_ptr<sparql::Endpoint> inner_;
    std::atomic<int> calls_{0};
};

inline std::string script_question(const std::string& cassette, std::size_t turn = 0) {
    auto j = nlohmann::json::parse(text::read_file(fixture("cassettes/" + cassette + ".script.json")));
    return j["sessions"][0]["turns"][turn]["question"].get<std::string>();
}

}  // namespace kgqa::testing
