#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgqa::csv {

using Row = std::vector<std::string>;

/// A parsed CSV document. The header row is always present on disk, even
/// when there are no data rows.
struct Table {
    Row header;
    std::vector<Row> rows;

    std::optional<std::size_t> column_index(std::string_view name) const;
};

/// RFC-4180: comma separated, fields quoted when they contain a comma,
/// quote, CR or LF; embedded quotes doubled; CRLF not required on read.
std::string quote_field(std::string_view field);
std::string format_row(const Row& row);
std::string format_table(const Table& table);

Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Table& table);

}  // namespace kgqa::csv
