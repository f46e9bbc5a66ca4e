#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kgqa::interp {

enum class FileKind { Spreadsheet, Mgf, Text, Unknown };
std::string to_string(FileKind k);
FileKind parse_file_kind(const std::string& s);

inline constexpr std::size_t kSampleRows = 5;

struct FileSummary {
    std::string path;
    std::uintmax_t size_bytes = 0;
    FileKind kind = FileKind::Unknown;
    // spreadsheet
    std::size_t rows = 0;
    std::size_t columns = 0;
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> sample_rows;
    // mgf
    std::size_t spectrum_count = 0;
    // text
    std::size_t line_count = 0;
    std::string warning;

    bool operator==(const FileSummary&) const = default;
};

nlohmann::json to_json(const FileSummary& s);
FileSummary summary_from_json(const nlohmann::json& j);

/// Resolves `path` and requires it to stay inside `root`; throws
/// Error(Security) otherwise. Returns the canonical path.
std::filesystem::path confine(const std::filesystem::path& root, const std::filesystem::path& path);

/// Kind from the extension first, then a content sniff (MGF = contains
/// "BEGIN IONS"). Spectra are counted by BEGIN IONS lines; a different END
/// IONS count sets a malformed-file warning quoting both.
FileSummary analyze_file(const std::filesystem::path& path, const std::filesystem::path& session_dir);

}  // namespace kgqa::interp
