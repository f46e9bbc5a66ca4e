#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/app/config.hpp"

namespace kgqa::app {

/// Cassette script: canned agent responses in call order, grouped by
/// session and turn.
///   {"sessions": [{"turns": [{"question": "...", "responses": [{"purpose": "entry", "text": "..."}]}]}]}
/// or, for evaluation runs over a dataset (relative to the script):
///   {"eval_dataset": "dataset.csv", "responses": [...]}
struct AuthorResult {
    std::vector<std::string> answers;  // final message text per turn (or generated query per question)
    std::size_t completions = 0;
};

/// Runs the script in record mode against a scripted provider and writes the
/// cassette. Throws Error(Precondition) if any scripted response is left
/// unused, which means the script no longer matches the pipeline.
AuthorResult author_cassette(AppConfig config, const std::filesystem::path& script_path,
                             const std::filesystem::path& cassette_out);

}  // namespace kgqa::app
