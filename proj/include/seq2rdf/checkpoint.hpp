#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "seq2rdf/model.hpp"

namespace seq2rdf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary little-endian layout:
//   magic "S2RDFCKP", u32 version, u32 precision bits (64),
//   config as key=value text, word / entity / predicate symbol lists,
//   u64 tensor count, then per tensor: name, u64 rows, u64 cols, raw f64s,
//   u64 FNV-1a checksum of every preceding byte.
// Strings are u64 length + bytes.
std::string serialize_checkpoint(const Model& model);
Model deserialize_checkpoint(const std::string& bytes, const std::string& origin = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace seq2rdf
