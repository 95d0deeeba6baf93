#include "adrmtl/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "adrmtl/errors.hpp"
#include "adrmtl/rng.hpp"
#include "adrmtl/text_pipeline.hpp"

namespace adrmtl {

namespace {

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

EmbeddingTable::EmbeddingTable(int dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension <= 0) throw ConfigError("embedding dimension must be positive");
}

EmbeddingTable EmbeddingTable::load(const std::string& path, int expected_dim,
                                    std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings file: " + path);
  EmbeddingTable table(expected_dim, seed);

  std::string line;
  bool first = true;
  std::size_t parsed = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;

    // Optional "count dim" header: two numeric fields and nothing else.
    if (first) {
      first = false;
      long long dim = 0;
      std::istringstream probe(line);
      long long count = 0;
      if (probe >> count >> dim && probe.eof()) continue;
    }

    Eigen::VectorXd vec(expected_dim);
    int got = 0;
    double value = 0.0;
    while (got < expected_dim && fields >> value) vec[got++] = value;
    double extra;
    if (got != expected_dim || (fields >> extra) || !vec.allFinite()) {
      ++table.skipped_lines_;
      continue;
    }
    table.vectors_[lowercase(word)] = std::move(vec);
    ++parsed;
  }
  if (parsed == 0) {
    throw DataError("no line of " + path + " parsed at dimension " +
                    std::to_string(expected_dim));
  }
  return table;
}

Eigen::VectorXd EmbeddingTable::lookup(const std::string& word) const {
  if (word == kPadToken) return Eigen::VectorXd::Zero(dimension_);
  std::string key = lowercase(word);
  auto it = vectors_.find(key);
  if (it != vectors_.end()) return it->second;

  auto rng = substream(seed_ ^ fnv1a(key), "oov-embedding");
  std::uniform_real_distribution<double> dist(-0.25, 0.25);
  Eigen::VectorXd vec(dimension_);
  for (int i = 0; i < dimension_; ++i) vec[i] = dist(rng);
  return vec;
}

}  // namespace adrmtl
