#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kgqa::text {

std::string trim(std::string_view s);
/// ASCII case-fold; bytes >= 0x80 pass through unchanged.
std::string lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Lower-cased alphanumeric runs; used for local-name token overlap.
std::vector<std::string> word_tokens(std::string_view s);
/// Splits camelCase / snake_case identifiers into lower-cased tokens.
std::vector<std::string> identifier_tokens(std::string_view s);

/// RFC 3986 percent-encoding; only unreserved characters are kept literal.
std::string percent_encode(std::string_view s);
std::string percent_decode(std::string_view s);

/// Replaces every `{{key}}` with its value. Unknown placeholders are left as-is.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace kgqa::text
