#include <doctest.h>

#include <cstring>

#include "seq2rdf/checkpoint.hpp"
#include "seq2rdf/error.hpp"
#include "test_util.hpp"
#include "toy.hpp"

using namespace seq2rdf;

namespace {

Model toy_model(std::uint64_t seed) {
  Model m;
  m.config = toy::tiny_config();
  m.config.set_flags("A,G");
  m.words = toy::words();
  m.targets = toy::targets();
  SeededRng rng(seed);
  m.params = toy::random_params(m.config, m.words.size(), m.targets.size(), rng);
  return m;
}

}  // namespace

TEST_CASE("checkpoint round-trip is bit-identical") {
  const Model m = toy_model(1);
  const std::string bytes = serialize_checkpoint(m);
  const Model back = deserialize_checkpoint(bytes);
  CHECK(back.params == m.params);
  CHECK(back.words == m.words);
  CHECK(back.targets == m.targets);
  CHECK(back.config.to_key_values() == m.config.to_key_values());
  CHECK(serialize_checkpoint(back) == bytes);

  testutil::TempDir dir("ckpt");
  save_checkpoint(dir / "m.ckpt", m);
  CHECK(serialize_checkpoint(load_checkpoint(dir / "m.ckpt")) == bytes);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), Error);
}

TEST_CASE("checkpoint predictions survive a reload") {
  const Model m = toy_model(2);
  const Model back = deserialize_checkpoint(serialize_checkpoint(m));
  const std::vector<std::string> tokens{"w3", "w1", "w7"};
  const auto a = translate_greedy(tokens, m), b = translate_greedy(tokens, back);
  CHECK(a.ids == b.ids);
  CHECK(a.total_log_prob == b.total_log_prob);
}

TEST_CASE("corrupted checkpoints are rejected") {
  const std::string bytes = serialize_checkpoint(toy_model(3));

  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, cut)), Error);
  }

  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(magic), doctest::Contains("magic"), Error);

  std::string version = bytes;
  const std::uint32_t v = kCheckpointVersion + 1;
  std::memcpy(version.data() + 8, &v, sizeof v);
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(version), doctest::Contains("version"), Error);

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(flipped), doctest::Contains("checksum"), Error);
}

TEST_CASE("tensor shapes must agree with the stored vocabularies") {
  Model m = toy_model(4);
  // One extra word in the vocabulary, tensors still sized for the old one.
  m.words.add("extra");
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(serialize_checkpoint(m)), doctest::Contains("enc_embed"),
                       Error);
}
