#include "kgqa/interp/interpret.hpp"

#include <algorithm>
#include <set>

#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::interp {

namespace fs = std::filesystem;

std::string to_string(ChartType t) {
    switch (t) {
        case ChartType::Bar: return "bar";
        case ChartType::Histogram: return "histogram";
        case ChartType::Scatter: return "scatter";
        case ChartType::Line: return "line";
    }
    return "bar";
}

ChartType parse_chart_type(const std::string& s) {
    if (s == "bar") return ChartType::Bar;
    if (s == "histogram") return ChartType::Histogram;
    if (s == "scatter") return ChartType::Scatter;
    if (s == "line") return ChartType::Line;
    throw Error(ErrorCode::InvalidInput, "unknown chart type '" + s + "'");
}

nlohmann::json to_json(const ChartSpec& c) {
    nlohmann::json j{{"spec_version", c.spec_version},
                     {"chart_type", to_string(c.chart_type)},
                     {"x", c.x},
                     {"title", c.title},
                     {"data", c.data}};
    j["y"] = c.y ? nlohmann::json(*c.y) : nlohmann::json(nullptr);
    return j;
}

ChartSpec chart_from_json(const nlohmann::json& j) {
    ChartSpec c;
    c.spec_version = j.at("spec_version").get<int>();
    c.chart_type = parse_chart_type(j.at("chart_type").get<std::string>());
    c.x = j.at("x").get<std::string>();
    if (j.contains("y") && !j["y"].is_null()) c.y = j["y"].get<std::string>();
    c.title = j.value("title", "");
    c.data = j.value("data", "");
    return c;
}

namespace {

bool is_number(const std::string& s) {
    auto t = text::trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

struct Columns {
    std::vector<std::size_t> numeric;
    std::vector<std::size_t> categorical;
};

Columns classify(const csv::Table& t) {
    Columns c;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        bool any = false, all = true;
        for (const auto& r : t.rows) {
            if (i >= r.size() || text::trim(r[i]).empty()) continue;
            any = true;
            if (!is_number(r[i])) {
                all = false;
                break;
            }
        }
        (any && all ? c.numeric : c.categorical).push_back(i);
    }
    return c;
}

/// Column among `candidates` whose name best overlaps the request; falls back
/// to the first candidate.
std::size_t pick(const csv::Table& t, const std::vector<std::size_t>& candidates, std::string_view request) {
    auto req = text::word_tokens(request);
    std::set<std::string> wanted(req.begin(), req.end());
    std::size_t best = candidates.front();
    int best_score = 0;
    for (auto c : candidates) {
        int score = 0;
        for (const auto& tok : text::identifier_tokens(t.header[c])) {
            if (wanted.count(tok) || wanted.count(tok + "s")) ++score;
        }
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return best;
}

bool mentions(std::string_view request, std::string_view word) { return text::contains_ci(request, word); }

}  // namespace

bool wants_chart(std::string_view request) {
    for (auto w : {"plot", "chart", "graph", "histogram", "visuali", "diagram"}) {
        if (mentions(request, w)) return true;
    }
    return false;
}

ChartSpec plan_chart(const fs::path& csv_path, std::string_view request) {
    const auto t = csv::read_file(csv_path);
    const auto cols = classify(t);
    ChartSpec spec;
    spec.data = csv_path.filename().string();
    auto name = [&](std::size_t i) { return t.header[i]; };
    if (cols.numeric.empty()) {
        throw Error(ErrorCode::InvalidInput,
                    "cannot chart " + spec.data + ": it has no numeric columns to plot");
    }
    if (mentions(request, "histogram") || (cols.numeric.size() == 1 && cols.categorical.empty())) {
        spec.chart_type = ChartType::Histogram;
        spec.x = name(pick(t, cols.numeric, request));
        spec.title = "Distribution of " + spec.x;
        return spec;
    }
    if (mentions(request, "scatter")) {
        if (cols.numeric.size() < 2) {
            throw Error(ErrorCode::InvalidInput, "a scatter plot needs two numeric columns; " + spec.data + " has one");
        }
        auto xi = pick(t, cols.numeric, request);
        std::vector<std::size_t> rest;
        for (auto c : cols.numeric) {
            if (c != xi) rest.push_back(c);
        }
        spec.chart_type = ChartType::Scatter;
        spec.x = name(xi);
        spec.y = name(pick(t, rest, request));
        spec.title = *spec.y + " vs " + spec.x;
        return spec;
    }
    spec.chart_type = mentions(request, "line") ? ChartType::Line : ChartType::Bar;
    auto yi = pick(t, cols.numeric, request);
    std::vector<std::size_t> xs = cols.categorical;
    if (xs.empty()) {
        for (auto c : cols.numeric) {
            if (c != yi) xs.push_back(c);
        }
    }
    spec.x = name(pick(t, xs, request));
    spec.y = name(yi);
    spec.title = *spec.y + " by " + spec.x;
    return spec;
}

ChartSpec make_chart_spec(const fs::path& csv_path, std::string_view request, const fs::path& out_path) {
    auto spec = plan_chart(csv_path, request);
    text::write_file(out_path, to_json(spec).dump(2) + "\n");
    return spec;
}

std::string spectrum_url(std::string_view usi_or_csv) {
    std::string input = text::trim(usi_or_csv);
    if (input.empty()) throw Error(ErrorCode::InvalidInput, "empty USI");
    std::string usi = input;
    std::error_code ec;
    const bool is_usi = text::lower(input).rfind("mzspec:", 0) == 0;
    if (!is_usi && (fs::is_regular_file(input, ec) || text::lower(fs::path(input).extension().string()) == ".csv")) {
        auto t = csv::read_file(input);
        std::optional<std::size_t> col;
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            if (text::lower(text::trim(t.header[i])) == "usi") col = i;
        }
        if (!col) {
            std::string names;
            for (const auto& h : t.header) names += (names.empty() ? "" : ", ") + h;
            throw Error(ErrorCode::InvalidInput, "CSV has no 'usi' column (columns: " + names + ")");
        }
        if (t.rows.empty() || *col >= t.rows.front().size()) throw Error(ErrorCode::InvalidInput, "CSV has no USI rows");
        usi = text::trim(t.rows.front()[*col]);
        if (usi.empty()) throw Error(ErrorCode::InvalidInput, "empty USI in first row");
    }
    return std::string(kSpectrumViewerPrefix) + text::percent_encode(usi);
}

Summary summarize_results(const fs::path& spill_path, const std::string& question, const std::string& query,
                          const chain::PromptLibrary& prompts, const std::string& model, const CompleteFn& complete,
                          const llm::TokenCounter& counter) {
    std::error_code ec;
    if (!fs::is_regular_file(spill_path, ec)) throw Error(ErrorCode::Io, "result file not found: " + spill_path.string());
    const std::string rows_text = text::read_file(spill_path);
    const auto table = csv::parse(rows_text);
    Summary out;
    out.rows_inlined = llm::within_result_budget(query, question, rows_text, counter);
    std::string results;
    if (out.rows_inlined) {
        results = "Results (CSV):\n" + rows_text;
    } else {
        results = "The results are too large to include. Columns: " + csv::format_row(table.header) +
                  "Row count: " + std::to_string(table.rows.size()) + "\nFull results file: " + spill_path.filename().string() +
                  "\nTell the user to retrieve the complete output from the generated CSV file.\n";
    }
    out.prompt = prompts.render("interpreter", {{"question", question}, {"query", query}, {"results", results}});
    auto res = complete(llm::ChatRequest{model, {{"user", out.prompt}}, 0.0, "interpreter"});
    out.text = text::trim(res.text);
    out.usage = res.usage;
    return out;
}

}  // namespace kgqa::interp
