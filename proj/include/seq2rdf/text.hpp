#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace seq2rdf {

// Lower-cases ASCII letters and splits on whitespace and ASCII punctuation.
// Punctuation is a separator and is dropped; bytes >= 0x80 are kept so UTF-8
// words survive intact.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower_ascii(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Splits on a single character, keeping empty fields.
std::vector<std::string> split(std::string_view text, char sep);

std::string_view trim(std::string_view text);

}  // namespace seq2rdf
