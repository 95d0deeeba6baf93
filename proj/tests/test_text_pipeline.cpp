#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "adrmtl/errors.hpp"
#include "adrmtl/text_pipeline.hpp"

using namespace adrmtl;

namespace {

std::vector<Token> toks(std::initializer_list<const char*> words) {
  std::vector<Token> out;
  for (const char* w : words) out.push_back(Token{w, out.size()});
  return out;
}

}  // namespace

TEST_CASE("normalize_tweet replaces links and mentions") {
  CHECK(normalize_tweet("see http://t.co/abc now") ==
        std::string("see ") + kLinksToken + " now");
  CHECK(normalize_tweet("@BLENDOS Lamictal and trileptal") ==
        std::string(kUserToken) + " Lamictal and trileptal");
  CHECK(normalize_tweet("go to https://x.y and www.z.org") ==
        std::string("go to ") + kLinksToken + " and " + kLinksToken);
  CHECK(normalize_tweet("") == "");
}

TEST_CASE("normalize_tweet strips special characters and collapses space") {
  CHECK(normalize_tweet("weight   gain\tis :) not cool \xF0\x9F\x98\x80") ==
        "weight gain is not cool");
  CHECK(normalize_tweet("so-called 'fun', right?!") ==
        "so-called 'fun', right?!");
  // Hashtags are kept verbatim.
  CHECK(normalize_tweet("#insomnia again") == "#insomnia again");
}

TEST_CASE("normalize_tweet is idempotent") {
  std::vector<std::string> samples = {
      "see http://t.co/abc now",
      "@user1 seroquel :-( made me dizzy!! #fml",
      "",
      "plain words only",
      "\xE2\x9C\x93 ticks and \xF0\x9F\x92\x8A pills www.drugs.com",
  };
  for (const std::string& s : samples) {
    std::string once = normalize_tweet(s);
    CHECK(normalize_tweet(once) == once);
  }
}

TEST_CASE("tokenize splits on whitespace and keeps reserved tokens") {
  auto tokens = tokenize("weight gain is not cool");
  REQUIRE(tokens.size() == 5);
  CHECK(tokens[0].surface == "weight");
  CHECK(tokens[4].surface == "cool");
  CHECK(tokens[4].index == 4);

  auto reserved = tokenize(std::string(kUserToken) + " hello");
  REQUIRE(reserved.size() == 2);
  CHECK(reserved[0].surface == kUserToken);

  CHECK(tokenize("").empty());
}

TEST_CASE("encode_tags marks spans") {
  auto tokens = toks({"because", "weight", "gain", "is"});
  auto tags = encode_tags(tokens, {Span{1, 2, SpanKind::Adr}});
  CHECK(tags == std::vector<Tag>{Tag::Outside, Tag::IAdr, Tag::IAdr,
                                 Tag::Outside});

  CHECK(encode_tags(tokens, {}) ==
        std::vector<Tag>(4, Tag::Outside));

  auto five = toks({"a", "b", "c", "d", "e"});
  CHECK(encode_tags(five, {Span{0, 4, SpanKind::Other}}) ==
        std::vector<Tag>(5, Tag::IOther));
}

TEST_CASE("encode_tags rejects bad spans") {
  auto tokens = toks({"a", "b", "c"});
  CHECK_THROWS_AS(encode_tags(tokens, {Span{1, 3, SpanKind::Adr}}), DataError);
  CHECK_THROWS_AS(
      encode_tags(tokens, {Span{0, 1, SpanKind::Adr}, Span{1, 2, SpanKind::Other}}),
      DataError);
}

TEST_CASE("decode_spans finds maximal runs") {
  CHECK(decode_spans({Tag::Outside, Tag::IAdr, Tag::IAdr, Tag::Outside}, 4) ==
        std::vector<Span>{Span{1, 2, SpanKind::Adr}});
  CHECK(decode_spans(std::vector<Tag>(6, Tag::Outside), 6).empty());
  CHECK(decode_spans({Tag::IAdr, Tag::Outside, Tag::IAdr}, 3) ==
        std::vector<Span>{Span{0, 0, SpanKind::Adr}, Span{2, 2, SpanKind::Adr}});
  // PAD positions and anything past original_length contribute nothing.
  CHECK(decode_spans({Tag::IOther, Tag::Pad, Tag::Pad}, 1) ==
        std::vector<Span>{Span{0, 0, SpanKind::Other}});
}

TEST_CASE("encode/decode round-trips non-adjacent span sets") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<std::size_t> len_dist(1, 20);
    std::size_t len = len_dist(rng);
    std::vector<Token> tokens;
    for (std::size_t i = 0; i < len; ++i) tokens.push_back(Token{"w", i});

    // Random non-overlapping, non-adjacent spans.
    std::vector<Span> spans;
    std::size_t pos = 0;
    std::uniform_int_distribution<std::size_t> gap(0, 3), width(0, 2);
    std::bernoulli_distribution kind_coin(0.5);
    while (pos < len) {
      pos += gap(rng);
      if (pos >= len) break;
      std::size_t end = std::min(pos + width(rng), len - 1);
      spans.push_back(Span{pos, end,
                           kind_coin(rng) ? SpanKind::Adr : SpanKind::Other});
      pos = end + 2;  // at least one gap token
    }
    auto tags = encode_tags(tokens, spans);
    CHECK(decode_spans(tags, len) == spans);
  }
}

TEST_CASE("build_vocab keeps reserved tokens and respects the cap") {
  Vocabulary small = Vocabulary::build({{"a", "b", "c"}}, 40000);
  CHECK(small.size() == 3 + 4);
  CHECK(small.word(small.pad_id()) == kPadToken);
  CHECK(small.id("a") != small.unk_id());
  CHECK(small.id("zzz") == small.unk_id());

  std::vector<std::vector<std::string>> corpus = {
      {"drug", "drug", "x", "y"}, {"drug", "drug", "drug", "x"}};
  Vocabulary capped = Vocabulary::build(corpus, 4 + 1);
  CHECK(capped.size() == 5);
  CHECK(capped.id("drug") != capped.unk_id());
  CHECK(capped.id("x") == capped.unk_id());

  Vocabulary empty = Vocabulary::build({}, 4);
  CHECK(empty.size() == 4);
}

TEST_CASE("build_vocab breaks frequency ties by first appearance") {
  Vocabulary v = Vocabulary::build({{"late", "early", "late", "early"}}, 4 + 1);
  CHECK(v.id("late") != v.unk_id());
  CHECK(v.id("early") == v.unk_id());
}

TEST_CASE("pad_batch") {
  Vocabulary vocab = Vocabulary::build({{"a", "b", "c"}}, 100);
  LabeledSequence seq;
  seq.tokens = toks({"a", "b", "c"});
  seq.tags = {Tag::Outside, Tag::IAdr, Tag::Outside};
  seq.original_length = 3;

  PaddedBatch batch = pad_batch({seq}, 5, vocab);
  REQUIRE(batch.token_ids.size() == 1);
  CHECK(batch.token_ids[0].size() == 5);
  CHECK(batch.tags[0][3] == Tag::Pad);
  CHECK(batch.tags[0][4] == Tag::Pad);
  CHECK(batch.token_ids[0][4] == vocab.pad_id());
  CHECK(batch.original_lengths[0] == 3);
  // No PAD before original_length.
  for (std::size_t t = 0; t < 3; ++t) CHECK(batch.tags[0][t] != Tag::Pad);

  PaddedBatch exact = pad_batch({seq}, 3, vocab);
  CHECK(exact.tags[0].back() != Tag::Pad);

  CHECK_THROWS_AS(pad_batch({seq}, 2, vocab), DataError);
}

TEST_CASE("labeled corpus round-trips through the file format") {
  LabeledSequence a;
  a.tokens = toks({"weight", "gain", "is"});
  a.tags = {Tag::IAdr, Tag::IAdr, Tag::Outside};
  a.original_length = 3;
  LabeledSequence b;
  b.tokens = toks({"fine"});
  b.tags = {Tag::Outside};
  b.original_length = 1;

  std::string path = "test_corpus_roundtrip.tsv";
  write_labeled_corpus(path, {a, b});
  auto back = read_labeled_corpus(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].tokens[1].surface == "gain");
  CHECK(back[0].tags == a.tags);
  CHECK(back[1].original_length == 1);
  std::remove(path.c_str());
}

TEST_CASE("labeled corpus reader reports malformed lines") {
  std::string path = "test_corpus_bad.tsv";
  {
    std::ofstream out(path);
    out << "word-without-tab\n";
  }
  try {
    read_labeled_corpus(path);
    FAIL("expected DataError");
  } catch (const DataError& err) {
    CHECK(std::string(err.what()).find(":1:") != std::string::npos);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_labeled_corpus("no_such_file.tsv"), IoError);
}
