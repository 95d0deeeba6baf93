#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "adrmtl/embeddings.hpp"
#include "adrmtl/errors.hpp"
#include "adrmtl/text_pipeline.hpp"

using namespace adrmtl;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& p, const std::string& contents)
      : path(p) {
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load parses the word2vec text format with header") {
  TempFile f("emb_header.txt",
             "2 3\n"
             "drug 0.1 0.2 0.3\n"
             "pain -1.0 0.0 1.0\n");
  EmbeddingTable table = EmbeddingTable::load(f.path, 3);
  CHECK(table.size() == 2);
  CHECK(table.skipped_lines() == 0);
  Eigen::VectorXd v = table.lookup("drug");
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.1));
  CHECK(v[2] == doctest::Approx(0.3));
}

TEST_CASE("load skips malformed lines and counts them") {
  std::string contents;
  for (int i = 0; i < 10; ++i) {
    if (i == 4) {
      contents += "broken 1.0 2.0\n";  // wrong arity
    } else {
      contents += "word" + std::to_string(i) + " 1 2 3\n";
    }
  }
  TempFile f("emb_skips.txt", contents);
  EmbeddingTable table = EmbeddingTable::load(f.path, 3);
  CHECK(table.size() == 9);
  CHECK(table.skipped_lines() == 1);
}

TEST_CASE("load errors") {
  CHECK_THROWS_AS(EmbeddingTable::load("missing_embeddings.txt", 3), IoError);
  TempFile f("emb_all_bad.txt", "a 1 2\nb 3 4\n");
  CHECK_THROWS_AS(EmbeddingTable::load(f.path, 3), DataError);
}

TEST_CASE("keys are lowercased at load and query") {
  TempFile f("emb_case.txt", "Seroquel 1 2 3\n");
  EmbeddingTable table = EmbeddingTable::load(f.path, 3);
  CHECK(table.lookup("seroquel")[0] == doctest::Approx(1.0));
  CHECK(table.lookup("SEROQUEL")[2] == doctest::Approx(3.0));
}

TEST_CASE("padding token maps to zeros") {
  EmbeddingTable table(400, 7);
  Eigen::VectorXd v = table.lookup(kPadToken);
  REQUIRE(v.size() == 400);
  CHECK(v.norm() == 0.0);
}

TEST_CASE("OOV vectors are deterministic, bounded and word-dependent") {
  EmbeddingTable table(50, 123);
  Eigen::VectorXd a1 = table.lookup("neveristored");
  Eigen::VectorXd a2 = table.lookup("neveristored");
  CHECK(a1 == a2);
  CHECK(a1.minCoeff() >= -0.25);
  CHECK(a1.maxCoeff() <= 0.25);

  Eigen::VectorXd b = table.lookup("otherword");
  CHECK(a1 != b);

  // A different table seed gives different fallbacks.
  EmbeddingTable other(50, 124);
  CHECK(other.lookup("neveristored") != a1);

  // Identical across separately constructed tables with the same seed.
  EmbeddingTable twin(50, 123);
  CHECK(twin.lookup("neveristored") == a1);
}

TEST_CASE("every lookup result is finite with the table dimension") {
  EmbeddingTable table(16, 9);
  for (const char* w : {"a", "b", kPadToken, "longer-word", "123"}) {
    Eigen::VectorXd v = table.lookup(w);
    CHECK(v.size() == 16);
    CHECK(v.allFinite());
  }
}
