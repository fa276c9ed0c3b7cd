#include "seq2rdf/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "seq2rdf/error.hpp"
#include "seq2rdf/text.hpp"

namespace seq2rdf {

KeyValues parse_key_values(std::string_view text, const std::string& origin) {
  KeyValues out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto pos = line.find('=');
    if (pos == std::string_view::npos) {
      throw Error(origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, pos));
    if (key.empty()) throw Error(origin + ":" + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::string(key), std::string(trim(line.substr(pos + 1))));
  }
  return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path.string());
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view key, std::string_view value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(std::string(value), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw Error("config key '" + std::string(key) + "': not a number: '" + std::string(value) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  const bool negative = !value.empty() && value.front() == '-';
  try {
    v = std::stoull(std::string(value), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (negative || used == 0 || used != value.size()) {
    throw Error("config key '" + std::string(key) + "': not a non-negative integer: '" +
                std::string(value) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const auto v = to_lower_ascii(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error("config key '" + std::string(key) + "': not a boolean: '" + std::string(value) + "'");
}

}  // namespace seq2rdf
