#include "kgqa/core/csv.hpp"

#include <fstream>
#include <sstream>

#include "kgqa/core/error.hpp"

namespace kgqa::csv {

std::optional<std::size_t> Table::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

std::string quote_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += quote_field(row[i]);
    }
    out += "\r\n";
    return out;
}

std::string format_table(const Table& table) {
    std::string out = format_row(table.header);
    for (const auto& row : table.rows) out += format_row(row);
    return out;
}

Table parse(std::string_view text) {
    std::vector<Row> records;
    Row current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool pending = false;  // a record has content not yet pushed

    auto end_field = [&] {
        current.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(current));
        current.clear();
        pending = false;
    };

    // Skip UTF-8 BOM.
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field_started && field.empty()) {
                    in_quotes = true;
                    field_started = true;
                    pending = true;
                } else {
                    field += c;
                }
                break;
            case ',':
                end_field();
                pending = true;
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                field += c;
                field_started = true;
                pending = true;
        }
    }
    if (in_quotes) throw Error(ErrorCode::Parse, "csv: unterminated quoted field");
    if (pending || !field.empty() || !current.empty()) end_record();

    Table table;
    if (records.empty()) return table;
    table.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        // A lone empty field is a blank line.
        if (records[i].size() == 1 && records[i][0].empty()) continue;
        table.rows.push_back(std::move(records[i]));
    }
    return table;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read CSV file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void write_file(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write CSV file: " + path.string());
    out << format_table(table);
    if (!out) throw Error(ErrorCode::Io, "short write to CSV file: " + path.string());
}

}  // namespace kgqa::csv
