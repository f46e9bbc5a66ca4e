#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "kgqa/chain/prompts.hpp"
#include "kgqa/llm/chat.hpp"

namespace kgqa::interp {

enum class ChartType { Bar, Histogram, Scatter, Line };
std::string to_string(ChartType t);
ChartType parse_chart_type(const std::string& s);

inline constexpr int kChartSpecVersion = 1;

struct ChartSpec {
    int spec_version = kChartSpecVersion;
    ChartType chart_type = ChartType::Bar;
    std::string x;
    std::optional<std::string> y;
    std::string title;
    std::string data;  // artifact name of the CSV the columns refer to

    bool operator==(const ChartSpec&) const = default;
};

nlohmann::json to_json(const ChartSpec& c);
ChartSpec chart_from_json(const nlohmann::json& j);

/// Picks a chart for `request` over the CSV at `csv_path`. "distribution"
/// means a bar chart of a value per category; a histogram is chosen only
/// when a single numeric column is charted. Throws Error(InvalidInput) with
/// a user-facing explanation when no suitable columns exist.
ChartSpec plan_chart(const std::filesystem::path& csv_path, std::string_view request);

/// plan_chart, then writes the spec JSON to `out_path`.
ChartSpec make_chart_spec(const std::filesystem::path& csv_path, std::string_view request,
                          const std::filesystem::path& out_path);

inline constexpr std::string_view kSpectrumViewerPrefix = "https://metabolomics-usi.gnps2.org/dashinterface/?usi1=";

/// Viewer URL for a USI, or for the first row's `usi` value when given a CSV.
std::string spectrum_url(std::string_view usi_or_csv);

struct Summary {
    std::string text;
    std::string prompt;
    bool rows_inlined = false;
    llm::TokenUsage usage;
};

using CompleteFn = std::function<llm::ChatResponse(const llm::ChatRequest&)>;

/// One completion summarizing the spilled results. Rows go into the prompt
/// only when query + question + CSV text fit the token budget; otherwise the
/// prompt carries the header, row count and spill path.
Summary summarize_results(const std::filesystem::path& spill_path, const std::string& question,
                          const std::string& query, const chain::PromptLibrary& prompts, const std::string& model,
                          const CompleteFn& complete, const llm::TokenCounter& counter = llm::estimate_tokens);

/// Whether the request asks for a plot.
bool wants_chart(std::string_view request);

}  // namespace kgqa::interp
