#ifndef ADRMTL_EMBEDDINGS_HPP
#define ADRMTL_EMBEDDINGS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <unordered_map>

namespace adrmtl {

// Pretrained word-embedding lookup table. Immutable after load; vectors
// are frozen during training. Unknown words get a deterministic
// pseudo-random vector seeded by (table seed, word) so runs reproduce.
class EmbeddingTable {
 public:
  // Empty table: every non-pad word resolves through the OOV generator.
  EmbeddingTable(int dimension, std::uint64_t seed);

  // word2vec text format: optional "count dim" header, then
  // "word v_1 ... v_d" per line. Keys are lowercased at load. Lines of
  // the wrong arity are skipped and counted.
  static EmbeddingTable load(const std::string& path, int expected_dim,
                             std::uint64_t seed = 0);

  // Known word -> stored vector; padding token -> zeros; unknown word ->
  // deterministic uniform [-0.25, 0.25]. Query is lowercased first.
  Eigen::VectorXd lookup(const std::string& word) const;

  int dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  std::size_t skipped_lines() const { return skipped_lines_; }

 private:
  int dimension_;
  std::uint64_t seed_;
  std::size_t skipped_lines_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

}  // namespace adrmtl

#endif  // ADRMTL_EMBEDDINGS_HPP
