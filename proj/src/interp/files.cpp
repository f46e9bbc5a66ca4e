#include "kgqa/interp/files.hpp"

#include <algorithm>
#include <cctype>

#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::interp {

namespace fs = std::filesystem;

std::string to_string(FileKind k) {
    switch (k) {
        case FileKind::Spreadsheet: return "spreadsheet";
        case FileKind::Mgf: return "mgf";
        case FileKind::Text: return "text";
        case FileKind::Unknown: return "unknown";
    }
    return "unknown";
}

FileKind parse_file_kind(const std::string& s) {
    if (s == "spreadsheet") return FileKind::Spreadsheet;
    if (s == "mgf") return FileKind::Mgf;
    if (s == "text") return FileKind::Text;
    return FileKind::Unknown;
}

nlohmann::json to_json(const FileSummary& s) {
    nlohmann::json j{{"path", s.path}, {"size_bytes", s.size_bytes}, {"kind", to_string(s.kind)}};
    switch (s.kind) {
        case FileKind::Spreadsheet:
            j["rows"] = s.rows;
            j["columns"] = s.columns;
            j["headers"] = s.headers;
            j["sample_rows"] = s.sample_rows;
            break;
        case FileKind::Mgf: j["spectrum_count"] = s.spectrum_count; break;
        case FileKind::Text: j["line_count"] = s.line_count; break;
        case FileKind::Unknown: break;
    }
    if (!s.warning.empty()) j["warning"] = s.warning;
    return j;
}

FileSummary summary_from_json(const nlohmann::json& j) {
    FileSummary s;
    s.path = j.at("path").get<std::string>();
    s.size_bytes = j.at("size_bytes").get<std::uintmax_t>();
    s.kind = parse_file_kind(j.at("kind").get<std::string>());
    s.rows = j.value("rows", std::size_t{0});
    s.columns = j.value("columns", std::size_t{0});
    s.headers = j.value("headers", std::vector<std::string>{});
    s.sample_rows = j.value("sample_rows", std::vector<std::vector<std::string>>{});
    s.spectrum_count = j.value("spectrum_count", std::size_t{0});
    s.line_count = j.value("line_count", std::size_t{0});
    s.warning = j.value("warning", "");
    return s;
}

fs::path confine(const fs::path& root, const fs::path& path) {
    std::error_code ec;
    auto base = fs::weakly_canonical(root, ec);
    auto target = fs::weakly_canonical(path.is_absolute() ? path : root / path, ec);
    if (ec) throw Error(ErrorCode::Security, "cannot resolve path " + path.string());
    auto rel = target.lexically_relative(base);
    if (rel.empty() || *rel.begin() == ".." || rel.is_absolute()) {
        throw Error(ErrorCode::Security, "path escapes the session directory: " + path.string());
    }
    return target;
}

namespace {

std::size_t count_lines(const std::string& body) {
    if (body.empty()) return 0;
    auto n = static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n'));
    return body.back() == '\n' ? n : n + 1;
}

bool looks_binary(const std::string& body) {
    auto n = std::min<std::size_t>(body.size(), 4096);
    for (std::size_t i = 0; i < n; ++i) {
        if (body[i] == '\0') return true;
    }
    return false;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto t = line.find('\t', pos);
        out.push_back(line.substr(pos, t == std::string::npos ? std::string::npos : t - pos));
        if (t == std::string::npos) break;
        pos = t + 1;
    }
    return out;
}

csv::Table parse_tsv(const std::string& body) {
    csv::Table t;
    std::size_t pos = 0;
    bool first = true;
    while (pos < body.size()) {
        auto nl = body.find('\n', pos);
        std::string line = body.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? body.size() : nl + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) t.header = split_tabs(line);
        else t.rows.push_back(split_tabs(line));
        first = false;
    }
    return t;
}

}  // namespace

FileSummary analyze_file(const fs::path& path, const fs::path& session_dir) {
    const auto real = confine(session_dir, path);
    std::error_code ec;
    if (!fs::is_regular_file(real, ec)) throw Error(ErrorCode::Io, "cannot read file " + path.string());
    FileSummary s;
    s.path = real.string();
    s.size_bytes = fs::file_size(real, ec);
    const std::string body = text::read_file(real);
    const std::string ext = text::lower(real.extension().string());

    if (ext == ".csv" || ext == ".tsv") s.kind = FileKind::Spreadsheet;
    else if (ext == ".mgf") s.kind = FileKind::Mgf;
    else if (ext == ".txt" || ext == ".text" || ext == ".log" || ext == ".md") s.kind = FileKind::Text;
    else if (body.find("BEGIN IONS") != std::string::npos) s.kind = FileKind::Mgf;
    else if (!looks_binary(body)) s.kind = FileKind::Text;

    switch (s.kind) {
        case FileKind::Spreadsheet: {
            csv::Table t;
            try {
                t = ext == ".tsv" ? parse_tsv(body) : csv::parse(body);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidInput, "malformed spreadsheet " + path.filename().string() + ": " + e.what());
            }
            s.headers = t.header;
            s.columns = t.header.size();
            s.rows = t.rows.size();
            for (std::size_t i = 0; i < std::min(kSampleRows, t.rows.size()); ++i) s.sample_rows.push_back(t.rows[i]);
            break;
        }
        case FileKind::Mgf: {
            std::size_t begins = 0, ends = 0, pos = 0;
            while (pos < body.size()) {
                auto nl = body.find('\n', pos);
                auto line = text::trim(std::string_view(body).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
                pos = nl == std::string::npos ? body.size() : nl + 1;
                if (line == "BEGIN IONS") ++begins;
                else if (line == "END IONS") ++ends;
            }
            s.spectrum_count = begins;
            if (begins != ends) {
                s.warning = "malformed MGF: " + std::to_string(begins) + " BEGIN IONS vs " + std::to_string(ends) +
                            " END IONS";
            }
            break;
        }
        case FileKind::Text: s.line_count = count_lines(body); break;
        case FileKind::Unknown: break;
    }
    return s;
}

}  // namespace kgqa::interp
