#include "seq2rdf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "seq2rdf/config.hpp"
#include "seq2rdf/error.hpp"

namespace seq2rdf {
namespace {

constexpr char kMagic[8] = {'S', '2', 'R', 'D', 'F', 'C', 'K', 'P'};
constexpr std::uint32_t kPrecisionBits = 64;

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    buf_ += s;
  }
  void strings(const std::vector<std::string>& v) {
    u64(v.size());
    for (const auto& s : v) str(s);
  }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& buf, std::size_t limit, std::string origin)
      : buf_(buf), limit_(limit), origin_(std::move(origin)) {}

  void need(std::size_t n, const char* what) {
    if (limit_ - pos_ < n) {
      throw Error(origin_ + ": checkpoint truncated while reading " + what + " at byte " +
                  std::to_string(pos_));
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string str(const char* what) {
    const auto n = u64(what);
    need(n, what);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<std::string> strings(const char* what) {
    const auto n = u64(what);
    need(n * 8, what);
    std::vector<std::string> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(str(what));
    return out;
  }
  void skip(std::size_t n, const char* what) {
    need(n, what);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& buf_;
  std::size_t limit_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Model& model) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u32(kPrecisionBits);
  w.str(format_key_values(model.config.to_key_values()));
  w.strings(model.words.symbols());
  w.strings(model.targets.entities());
  w.strings(model.targets.predicates());
  const auto tensors = model.params.tensors();
  w.u64(tensors.size());
  for (const auto& t : tensors) {
    w.str(t.name);
    w.u64(t.tensor->rows());
    w.u64(t.tensor->cols());
    for (double v : t.tensor->values()) w.f64(v);
  }
  const std::uint64_t sum = fnv1a(w.buffer().data(), w.buffer().size());
  w.u64(sum);
  return std::move(w.buffer());
}

Model deserialize_checkpoint(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < sizeof kMagic + 8 ||
      std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(origin + ": not a seq2rdf checkpoint (bad magic or truncated header)");
  }
  const std::size_t body = bytes.size() - 8;
  Reader r(bytes, body, origin);
  r.skip(sizeof kMagic, "magic");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw Error(origin + ": checkpoint version " + std::to_string(version) +
                " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t precision = r.u32("precision");
  if (precision != kPrecisionBits) {
    throw Error(origin + ": checkpoint precision " + std::to_string(precision) +
                " bits is not supported");
  }
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[body + i])) << (8 * i);
  }
  if (stored != fnv1a(bytes.data(), body)) {
    throw Error(origin + ": checkpoint checksum mismatch (file truncated or corrupted)");
  }

  Model model;
  for (const auto& [k, v] : parse_key_values(r.str("config"), origin)) model.config.set(k, v);
  model.config.validate();
  model.words = WordVocab::from_symbols(r.strings("word vocabulary"));
  auto entities = r.strings("entity vocabulary");
  auto predicates = r.strings("predicate vocabulary");
  model.targets = TripleVocab(std::move(entities), std::move(predicates));
  model.params = ModelParams::zeros(model.config, model.words.size(), model.targets.size());

  auto slots = model.params.tensors();
  const auto count = r.u64("tensor count");
  if (count != slots.size()) {
    throw Error(origin + ": checkpoint holds " + std::to_string(count) + " tensors, expected " +
                std::to_string(slots.size()));
  }
  for (auto& slot : slots) {
    const auto name = r.str("tensor name");
    if (name != slot.name) {
      throw Error(origin + ": expected tensor " + slot.name + ", found " + name);
    }
    const auto rows = r.u64("tensor rows");
    const auto cols = r.u64("tensor cols");
    if (rows != slot.tensor->rows() || cols != slot.tensor->cols()) {
      throw Error(origin + ": tensor " + name + " is " + std::to_string(rows) + "x" +
                  std::to_string(cols) + " but the embedded config and vocabularies require " +
                  slot.tensor->shape_string());
    }
    r.need(rows * cols * 8, "tensor values");
    for (double& v : slot.tensor->values()) v = r.f64("tensor values");
  }
  if (r.pos() != body) throw Error(origin + ": trailing bytes after the last tensor");
  if (!model.params.all_finite()) throw Error(origin + ": checkpoint holds non-finite values");
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str(), path.string());
}

}  // namespace seq2rdf
