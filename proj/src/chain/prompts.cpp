#include "kgqa/chain/prompts.hpp"

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::chain {

PromptLibrary PromptLibrary::load_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw Error(ErrorCode::Config, "prompt directory not found: " + dir.string());
    }
    PromptLibrary lib;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            lib.templates_[entry.path().stem().string()] = text::read_file(entry.path());
        }
    }
    return lib;
}

const std::string& PromptLibrary::get(const std::string& ref) const {
    auto it = templates_.find(ref);
    if (it == templates_.end()) throw Error(ErrorCode::Config, "missing prompt template '" + ref + "'");
    return it->second;
}

std::string PromptLibrary::render(const std::string& ref, const std::map<std::string, std::string>& vars) const {
    return text::render_template(get(ref), vars);
}

}  // namespace kgqa::chain
