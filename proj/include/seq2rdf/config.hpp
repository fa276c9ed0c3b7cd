#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seq2rdf {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flat "key=value" text, '#' starts a comment line. Order is preserved.
KeyValues parse_key_values(std::string_view text, const std::string& origin = "<memory>");
KeyValues load_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);

// Round-trippable decimal rendering of a double.
std::string format_double(double v);

double parse_double(std::string_view key, std::string_view value);
std::uint64_t parse_uint(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);

}  // namespace seq2rdf
