#include "adrmtl/text_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "adrmtl/errors.hpp"

namespace adrmtl {

std::string tag_name(Tag t) {
  switch (t) {
    case Tag::IAdr:
      return "I-ADR";
    case Tag::IOther:
      return "I-Other";
    case Tag::Outside:
      return "O";
    case Tag::Pad:
      return "PAD";
  }
  throw DataError("unknown tag value");
}

Tag tag_from_name(const std::string& name) {
  if (name == "I-ADR") return Tag::IAdr;
  if (name == "I-Other") return Tag::IOther;
  if (name == "O") return Tag::Outside;
  if (name == "PAD") return Tag::Pad;
  throw DataError("unknown tag name: " + name);
}

namespace {

bool is_reserved(const std::string& tok) {
  return tok == kLinksToken || tok == kUserToken || tok == kPadToken ||
         tok == kUnkToken;
}

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

bool is_url(const std::string& tok) {
  return starts_with(tok, "http://") || starts_with(tok, "https://") ||
         starts_with(tok, "www.");
}

// Letters, digits, basic punctuation and '#' survive; everything else,
// including all non-ASCII bytes (emoticons, emoji), is dropped.
std::string strip_special(const std::string& tok) {
  std::string out;
  out.reserve(tok.size());
  for (unsigned char c : tok) {
    if (std::isalnum(c) || c == '.' || c == ',' || c == '!' || c == '?' ||
        c == '\'' || c == '-' || c == '#') {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& text) {
  std::vector<std::string> parts;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) parts.push_back(tok);
  return parts;
}

}  // namespace

std::string normalize_tweet(const std::string& raw) {
  std::string out;
  for (const std::string& tok : split_ws(raw)) {
    std::string mapped;
    if (is_reserved(tok)) {
      mapped = tok;
    } else if (is_url(tok)) {
      mapped = kLinksToken;
    } else if (tok.size() > 1 && tok[0] == '@') {
      mapped = kUserToken;
    } else {
      mapped = strip_special(tok);
    }
    if (mapped.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += mapped;
  }
  return out;
}

std::vector<Token> tokenize(const std::string& normalized) {
  std::vector<Token> tokens;
  for (std::string& part : split_ws(normalized)) {
    tokens.push_back(Token{std::move(part), tokens.size()});
  }
  return tokens;
}

std::vector<Tag> encode_tags(const std::vector<Token>& tokens,
                             const std::vector<Span>& spans) {
  std::vector<Tag> tags(tokens.size(), Tag::Outside);
  for (const Span& span : spans) {
    if (span.start > span.end || span.end >= tokens.size()) {
      throw DataError("span out of bounds");
    }
    Tag mark = span.kind == SpanKind::Adr ? Tag::IAdr : Tag::IOther;
    for (std::size_t i = span.start; i <= span.end; ++i) {
      if (tags[i] != Tag::Outside) throw DataError("overlapping spans");
      tags[i] = mark;
    }
  }
  return tags;
}

std::vector<Span> decode_spans(const std::vector<Tag>& tags,
                               std::size_t original_length) {
  std::vector<Span> spans;
  std::size_t limit = std::min(original_length, tags.size());
  std::size_t i = 0;
  while (i < limit) {
    Tag t = tags[i];
    if (t != Tag::IAdr && t != Tag::IOther) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i + 1 < limit && tags[i + 1] == t) ++i;
    spans.push_back(
        Span{start, i, t == Tag::IAdr ? SpanKind::Adr : SpanKind::Other});
    ++i;
  }
  return spans;
}

Vocabulary Vocabulary::build(
    const std::vector<std::vector<std::string>>& corpus, std::size_t cap) {
  Vocabulary vocab;
  vocab.id_to_word_ = {kPadToken, kLinksToken, kUserToken, kUnkToken};
  if (cap < vocab.id_to_word_.size()) {
    throw ConfigError("vocabulary cap smaller than reserved token count");
  }
  for (std::size_t i = 0; i < vocab.id_to_word_.size(); ++i) {
    vocab.word_to_id_[vocab.id_to_word_[i]] = static_cast<int>(i);
  }

  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> counts;
  std::vector<std::string> order;
  std::size_t pos = 0;
  for (const auto& seq : corpus) {
    for (const std::string& word : seq) {
      if (vocab.word_to_id_.count(word)) continue;
      auto [it, inserted] = counts.try_emplace(word, Entry{0, pos});
      if (inserted) order.push_back(word);
      ++it->second.count;
      ++pos;
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) {
                     const Entry& ea = counts.at(a);
                     const Entry& eb = counts.at(b);
                     if (ea.count != eb.count) return ea.count > eb.count;
                     return ea.first_seen < eb.first_seen;
                   });
  for (const std::string& word : order) {
    if (vocab.id_to_word_.size() >= cap) break;
    vocab.word_to_id_[word] = static_cast<int>(vocab.id_to_word_.size());
    vocab.id_to_word_.push_back(word);
  }
  return vocab;
}

int Vocabulary::id(const std::string& word) const {
  auto it = word_to_id_.find(word);
  return it == word_to_id_.end() ? unk_id() : it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_word_.size()) {
    throw DataError("vocabulary id out of range");
  }
  return id_to_word_[static_cast<std::size_t>(id)];
}

PaddedBatch pad_batch(const std::vector<LabeledSequence>& sequences,
                      std::size_t n, const Vocabulary& vocab) {
  PaddedBatch batch;
  for (const LabeledSequence& seq : sequences) {
    if (seq.original_length > n) {
      throw DataError("sequence length " +
                      std::to_string(seq.original_length) +
                      " exceeds pad length " + std::to_string(n));
    }
    std::vector<int> ids(n, vocab.pad_id());
    std::vector<Tag> tags(n, Tag::Pad);
    for (std::size_t i = 0; i < seq.original_length; ++i) {
      ids[i] = vocab.id(seq.tokens[i].surface);
      tags[i] = seq.tags[i];
    }
    batch.token_ids.push_back(std::move(ids));
    batch.tags.push_back(std::move(tags));
    batch.original_lengths.push_back(seq.original_length);
  }
  return batch;
}

LabeledSequence pad_sequence(const LabeledSequence& seq, std::size_t n) {
  if (seq.original_length > n) {
    throw DataError("sequence length " + std::to_string(seq.original_length) +
                    " exceeds pad length " + std::to_string(n));
  }
  LabeledSequence out;
  out.original_length = seq.original_length;
  out.tokens = seq.tokens;
  out.tags = seq.tags;
  out.tokens.resize(seq.original_length);
  out.tags.resize(seq.original_length);
  while (out.tokens.size() < n) {
    out.tokens.push_back(Token{kPadToken, out.tokens.size()});
    out.tags.push_back(Tag::Pad);
  }
  return out;
}

std::vector<LabeledSequence> read_labeled_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labeled corpus: " + path);
  std::vector<LabeledSequence> corpus;
  LabeledSequence current;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) {
      current.original_length = current.tokens.size();
      corpus.push_back(std::move(current));
      current = LabeledSequence{};
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected surface<TAB>tag");
    }
    std::string surface = line.substr(0, tab);
    std::string tag = line.substr(tab + 1);
    if (surface.empty()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": empty token");
    }
    try {
      current.tags.push_back(tag_from_name(tag));
    } catch (const DataError&) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown tag: " + tag);
    }
    current.tokens.push_back(Token{std::move(surface), current.tokens.size()});
  }
  flush();
  return corpus;
}

void write_labeled_corpus(const std::string& path,
                          const std::vector<LabeledSequence>& corpus) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write labeled corpus: " + path);
  for (const LabeledSequence& seq : corpus) {
    for (std::size_t i = 0; i < seq.original_length; ++i) {
      out << seq.tokens[i].surface << '\t' << tag_name(seq.tags[i]) << '\n';
    }
    out << '\n';
  }
}

std::vector<std::string> read_unlabeled_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open unlabeled corpus: " + path);
  std::vector<std::string> tweets;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tweets.push_back(line);
  }
  return tweets;
}

}  // namespace adrmtl
