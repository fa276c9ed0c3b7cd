#pragma once

#include <string_view>

namespace seq2rdf::log {

enum class Level { kQuiet = 0, kWarning = 1, kInfo = 2 };

void set_level(Level level);
Level level();

void warning(std::string_view message);
void info(std::string_view message);

}  // namespace seq2rdf::log
