#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace kgqa::chain {

/// Prompt templates keyed by file stem (`validator.txt` -> "validator").
/// Loaded once at startup; `{{name}}` placeholders are filled at render time.
class PromptLibrary {
public:
    static PromptLibrary load_dir(const std::filesystem::path& dir);

    void set(const std::string& ref, std::string text) { templates_[ref] = std::move(text); }
    bool has(const std::string& ref) const { return templates_.count(ref) > 0; }
    const std::string& get(const std::string& ref) const;
    std::string render(const std::string& ref, const std::map<std::string, std::string>& vars) const;

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace kgqa::chain
