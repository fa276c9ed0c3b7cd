#include "seq2rdf/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace seq2rdf::log {
namespace {

std::atomic<Level> g_level{Level::kWarning};
std::mutex g_mutex;

void emit(const char* tag, std::string_view message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << tag << message << '\n';
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void warning(std::string_view message) {
  if (level() >= Level::kWarning) emit("warning: ", message);
}

void info(std::string_view message) {
  if (level() >= Level::kInfo) emit("", message);
}

}  // namespace seq2rdf::log
