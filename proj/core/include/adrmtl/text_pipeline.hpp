#ifndef ADRMTL_TEXT_PIPELINE_HPP
#define ADRMTL_TEXT_PIPELINE_HPP

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace adrmtl {

// Reserved surface forms produced by tweet normalization.
inline constexpr const char* kLinksToken = "⟨LINKS⟩";
inline constexpr const char* kUserToken = "⟨USER⟩";
inline constexpr const char* kPadToken = "⟨PAD⟩";
inline constexpr const char* kUnkToken = "⟨UNK⟩";

// IO tag set. The order is fixed: it doubles as the output-unit index
// of the tagging head (d_l = 4) and as the greedy-decode tie-break order.
enum class Tag : int { IAdr = 0, IOther = 1, Outside = 2, Pad = 3 };

inline constexpr int kNumTags = 4;

std::string tag_name(Tag t);
Tag tag_from_name(const std::string& name);

struct Token {
  std::string surface;
  std::size_t index = 0;
};

enum class SpanKind { Adr, Other };

// Inclusive [start, end] token span.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  SpanKind kind = SpanKind::Adr;

  bool operator==(const Span&) const = default;
};

struct LabeledSequence {
  std::vector<Token> tokens;
  std::vector<Tag> tags;
  std::size_t original_length = 0;
};

// Replaces URLs and @-mentions with reserved tokens, strips characters
// outside letters/digits/basic punctuation, and collapses whitespace.
// Idempotent and total.
std::string normalize_tweet(const std::string& raw);

// Whitespace split of normalized text; reserved tokens survive intact.
std::vector<Token> tokenize(const std::string& normalized);

// IO encoding: tokens inside an ADR span get I-ADR, inside an Other span
// I-Other, all else O. Spans must be in bounds and non-overlapping.
std::vector<Tag> encode_tags(const std::vector<Token>& tokens,
                             const std::vector<Span>& spans);

// Each maximal run of identical I-* tags within original_length becomes
// one span. PAD and O produce nothing. Adjacent same-kind spans merge
// under IO: the codec cannot represent adjacency.
std::vector<Span> decode_spans(const std::vector<Tag>& tags,
                               std::size_t original_length);

class Vocabulary {
 public:
  // Reserved tokens always present, remaining slots by descending corpus
  // frequency, ties broken by first appearance.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t cap);

  int id(const std::string& word) const;  // unknown words map to unk_id()
  const std::string& word(int id) const;
  std::size_t size() const { return id_to_word_.size(); }

  int pad_id() const { return 0; }
  int links_id() const { return 1; }
  int user_id() const { return 2; }
  int unk_id() const { return 3; }

 private:
  std::unordered_map<std::string, int> word_to_id_;
  std::vector<std::string> id_to_word_;
};

struct PaddedBatch {
  std::vector<std::vector<int>> token_ids;   // rows of length n
  std::vector<std::vector<Tag>> tags;        // rows of length n
  std::vector<std::size_t> original_lengths;
};

// Pads every sequence to length n with the padding token id and PAD tag.
// A sequence longer than n is a length error.
PaddedBatch pad_batch(const std::vector<LabeledSequence>& sequences,
                      std::size_t n, const Vocabulary& vocab);

// Returns a LabeledSequence padded to length n with PAD tokens/tags.
LabeledSequence pad_sequence(const LabeledSequence& seq, std::size_t n);

// Labeled-corpus file: one "surface<TAB>tag" line per token, blank line
// between sequences.
std::vector<LabeledSequence> read_labeled_corpus(const std::string& path);
void write_labeled_corpus(const std::string& path,
                          const std::vector<LabeledSequence>& corpus);

// Unlabeled-corpus file: one raw tweet per line, UTF-8.
std::vector<std::string> read_unlabeled_corpus(const std::string& path);

}  // namespace adrmtl

#endif  // ADRMTL_TEXT_PIPELINE_HPP
