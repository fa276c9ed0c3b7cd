#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"
#include "seq2rdf/error.hpp"

namespace seq2rdf::simd {
namespace {

const KernelTable* initial_table() {
  const KernelTable* table = kernels_for(detect_level());
  return table != nullptr ? table : &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

bool cpu_supports(Level level) {
  switch (level) {
    case Level::kScalar:
      return true;
    case Level::kAvx2:
#if defined(SEQ2RDF_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* kernels_for(Level level) {
  if (!cpu_supports(level)) return nullptr;
  switch (level) {
    case Level::kScalar:
      return &scalar_kernels();
    case Level::kAvx2:
#if defined(SEQ2RDF_HAVE_AVX2)
      return &detail::avx2_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Level detect_level() {
  if (const char* env = std::getenv("SEQ2RDF_SIMD"); env != nullptr) {
    if (std::string(env) == "scalar") return Level::kScalar;
  }
  return cpu_supports(Level::kAvx2) ? Level::kAvx2 : Level::kScalar;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_level(Level level) {
  const KernelTable* table = kernels_for(level);
  if (table == nullptr) {
    throw Error("SIMD level '" + std::string(level_name(level)) + "' is not available");
  }
  active_slot().store(table, std::memory_order_release);
}

std::string_view level_name(Level level) {
  return level == Level::kAvx2 ? "avx2" : "scalar";
}

ScopedLevel::ScopedLevel(Level level) : previous_(active().level) { set_level(level); }

ScopedLevel::~ScopedLevel() { set_level(previous_); }

}  // namespace seq2rdf::simd
