#include "adrmtl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "adrmtl/errors.hpp"
#include "adrmtl/rng.hpp"
#include "parallel_util.hpp"

namespace adrmtl {

MatchCounts& MatchCounts::operator+=(const MatchCounts& other) {
  matched_predicted += other.matched_predicted;
  matched_gold += other.matched_gold;
  predicted_spans += other.predicted_spans;
  gold_spans += other.gold_spans;
  return *this;
}

namespace {

bool overlaps(const Span& a, const Span& b) {
  return a.start <= b.end && b.start <= a.end;
}

std::vector<Span> adr_only(const std::vector<Span>& spans) {
  std::vector<Span> out;
  for (const Span& s : spans) {
    if (s.kind == SpanKind::Adr) out.push_back(s);
  }
  return out;
}

MatchCounts count_matches(const std::vector<Span>& predicted,
                          const std::vector<Span>& gold, bool exact_match) {
  MatchCounts counts;
  counts.predicted_spans = predicted.size();
  counts.gold_spans = gold.size();
  auto hit = [&](const Span& a, const Span& b) {
    return exact_match ? (a.start == b.start && a.end == b.end)
                       : overlaps(a, b);
  };
  for (const Span& p : predicted) {
    for (const Span& g : gold) {
      if (hit(p, g)) {
        ++counts.matched_predicted;
        break;
      }
    }
  }
  for (const Span& g : gold) {
    for (const Span& p : predicted) {
      if (hit(p, g)) {
        ++counts.matched_gold;
        break;
      }
    }
  }
  return counts;
}

}  // namespace

PrfFragment prf_from_counts(const MatchCounts& counts) {
  PrfFragment frag;
  frag.counts = counts;
  frag.degenerate = counts.predicted_spans == 0 && counts.gold_spans == 0;
  if (counts.predicted_spans > 0) {
    frag.precision = static_cast<double>(counts.matched_predicted) /
                     static_cast<double>(counts.predicted_spans);
  }
  if (counts.gold_spans > 0) {
    frag.recall = static_cast<double>(counts.matched_gold) /
                  static_cast<double>(counts.gold_spans);
  }
  if (frag.precision + frag.recall > 0.0) {
    frag.f1 = 2.0 * frag.precision * frag.recall /
              (frag.precision + frag.recall);
  }
  return frag;
}

PrfFragment approx_match_prf(const std::vector<Span>& predicted,
                             const std::vector<Span>& gold, bool exact_match) {
  return prf_from_counts(
      count_matches(adr_only(predicted), adr_only(gold), exact_match));
}

PrfFragment evaluate_model(const ModelParams& params,
                           const std::vector<LabeledSequence>& test,
                           const EmbeddingTable& table, bool exact_match,
                           int threads) {
  std::size_t n = 0;
  for (const LabeledSequence& seq : test) {
    n = std::max(n, seq.original_length);
  }
  std::vector<MatchCounts> per_seq(test.size());
  detail::parallel_for(test.size(), threads, [&](std::size_t i) {
    LabeledSequence padded = pad_sequence(test[i], n);
    std::vector<Eigen::VectorXd> inputs = embed_sequence(padded.tokens, table);
    std::vector<bool> mask(n);
    for (std::size_t t = 0; t < n; ++t) mask[t] = t < test[i].original_length;
    ForwardTrace trace = bilstm_forward(params, inputs, mask);
    std::vector<Tag> decoded =
        decode_greedy(trace.adr_dists, test[i].original_length);
    std::vector<Span> pred =
        adr_only(decode_spans(decoded, test[i].original_length));
    std::vector<Span> gold =
        adr_only(decode_spans(test[i].tags, test[i].original_length));
    per_seq[i] = count_matches(pred, gold, exact_match);
  });
  MatchCounts total;
  for (const MatchCounts& c : per_seq) total += c;
  return prf_from_counts(total);
}

std::vector<int> fold_assignment(std::size_t corpus_size, int k,
                                 std::uint64_t seed) {
  std::vector<std::size_t> order(corpus_size);
  std::iota(order.begin(), order.end(), 0);
  auto rng = substream(seed, "folds");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> folds(corpus_size, 0);
  for (std::size_t pos = 0; pos < corpus_size; ++pos) {
    folds[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return folds;
}

EvalReport cross_validate(const std::vector<LabeledSequence>& corpus, int k,
                          const TrainFn& train_fn, const Hyperparams& hyper,
                          const EmbeddingTable& table, int threads) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  if (corpus.size() < static_cast<std::size_t>(k)) {
    throw ConfigError("corpus smaller than fold count");
  }
  std::vector<int> folds = fold_assignment(corpus.size(), k, hyper.seed);

  EvalReport report;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<LabeledSequence> train, test;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      (folds[i] == fold ? test : train).push_back(corpus[i]);
    }
    ModelParams params = train_fn(train, hyper);
    report.per_fold.push_back(
        evaluate_model(params, test, table, false, threads));
  }

  double k_d = static_cast<double>(k);
  auto mean_of = [&](auto getter) {
    double sum = 0.0;
    for (const PrfFragment& f : report.per_fold) sum += getter(f);
    return sum / k_d;
  };
  auto pop_std = [&](auto getter, double mean) {
    double sq = 0.0;
    for (const PrfFragment& f : report.per_fold) {
      double d = getter(f) - mean;
      sq += d * d;
    }
    return std::sqrt(sq / k_d);
  };
  auto p = [](const PrfFragment& f) { return f.precision; };
  auto r = [](const PrfFragment& f) { return f.recall; };
  auto f1 = [](const PrfFragment& f) { return f.f1; };
  report.aggregate.precision = mean_of(p);
  report.aggregate.recall = mean_of(r);
  report.aggregate.f1 = mean_of(f1);
  report.precision_std = pop_std(p, report.aggregate.precision);
  report.recall_std = pop_std(r, report.aggregate.recall);
  report.f1_std = pop_std(f1, report.aggregate.f1);
  bool all_degenerate = true;
  for (const PrfFragment& f : report.per_fold) {
    report.aggregate.counts += f.counts;
    all_degenerate = all_degenerate && f.degenerate;
  }
  report.aggregate.degenerate = all_degenerate;
  return report;
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "metric     mean     std\n";
  out << "precision  " << report.aggregate.precision << "  "
      << report.precision_std << "\n";
  out << "recall     " << report.aggregate.recall << "  " << report.recall_std
      << "\n";
  out << "f1         " << report.aggregate.f1 << "  " << report.f1_std << "\n";
  for (std::size_t i = 0; i < report.per_fold.size(); ++i) {
    const PrfFragment& f = report.per_fold[i];
    out << "fold " << i << ": P=" << f.precision << " R=" << f.recall
        << " F1=" << f.f1 << (f.degenerate ? " (degenerate)" : "") << "\n";
  }
  return out.str();
}

std::string report_to_tsv(const EvalReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  auto row = [&](const char* metric, double mean, double stddev,
                 auto getter) {
    out << metric << '\t' << mean << '\t' << stddev;
    for (const PrfFragment& f : report.per_fold) out << '\t' << getter(f);
    out << '\n';
  };
  row("precision", report.aggregate.precision, report.precision_std,
      [](const PrfFragment& f) { return f.precision; });
  row("recall", report.aggregate.recall, report.recall_std,
      [](const PrfFragment& f) { return f.recall; });
  row("f1", report.aggregate.f1, report.f1_std,
      [](const PrfFragment& f) { return f.f1; });
  return out.str();
}

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec,
                                      std::uint64_t seed) {
  if (spec.adr_lexicon_size == 0 && spec.injection_prob > 0.0) {
    throw ConfigError("empty ADR lexicon with nonzero injection probability");
  }
  if (spec.filler_vocab_size == 0 || spec.seq_min_len == 0 ||
      spec.seq_min_len > spec.seq_max_len ||
      spec.adr_phrase_min_len > spec.adr_phrase_max_len) {
    throw ConfigError("degenerate synthetic corpus spec");
  }
  if (spec.injection_prob < 0.0 || spec.injection_prob > 1.0) {
    throw ConfigError("injection probability outside [0, 1]");
  }

  auto rng = substream(seed, "synth");
  std::uniform_int_distribution<std::size_t> phrase_len(
      spec.adr_phrase_min_len, spec.adr_phrase_max_len);
  std::uniform_int_distribution<std::size_t> adr_word(
      0, std::max<std::size_t>(spec.adr_lexicon_size, 1) - 1);

  std::vector<std::vector<std::string>> lexicon;
  for (std::size_t i = 0; i < spec.adr_lexicon_size; ++i) {
    std::vector<std::string> phrase;
    std::size_t len = phrase_len(rng);
    for (std::size_t j = 0; j < len; ++j) {
      phrase.push_back("adr" + std::to_string(adr_word(rng)));
    }
    lexicon.push_back(std::move(phrase));
  }

  std::uniform_int_distribution<std::size_t> seq_len(spec.seq_min_len,
                                                     spec.seq_max_len);
  std::uniform_int_distribution<std::size_t> filler(
      0, spec.filler_vocab_size - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  auto make_sequence = [&]() -> LabeledSequence {
    std::size_t len = seq_len(rng);
    bool inject = spec.injection_prob > 0.0 && coin(rng) < spec.injection_prob;
    const std::vector<std::string>* phrase = nullptr;
    if (inject) {
      std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
      phrase = &lexicon[pick(rng)];
      len = std::max(len, phrase->size());
    }
    LabeledSequence seq;
    for (std::size_t t = 0; t < len; ++t) {
      seq.tokens.push_back(Token{"w" + std::to_string(filler(rng)), t});
      seq.tags.push_back(Tag::Outside);
    }
    if (phrase != nullptr) {
      std::uniform_int_distribution<std::size_t> at(0, len - phrase->size());
      std::size_t start = at(rng);
      for (std::size_t j = 0; j < phrase->size(); ++j) {
        seq.tokens[start + j].surface = (*phrase)[j];
        seq.tags[start + j] = Tag::IAdr;
      }
    }
    seq.original_length = len;
    return seq;
  };

  SyntheticCorpus corpus;
  for (std::size_t i = 0; i < spec.adr_count; ++i) {
    corpus.adr.push_back(make_sequence());
  }
  for (std::size_t i = 0; i < spec.ade_count; ++i) {
    LabeledSequence seq = make_sequence();
    AdeExample ex;
    ex.label = std::any_of(seq.tags.begin(), seq.tags.end(),
                           [](Tag t) { return t == Tag::IAdr; })
                   ? 1
                   : 0;
    ex.tokens = std::move(seq.tokens);
    corpus.ade.push_back(std::move(ex));
  }
  for (std::size_t i = 0; i < spec.pool_count; ++i) {
    LabeledSequence seq = make_sequence();
    std::string text;
    for (const Token& tok : seq.tokens) {
      if (!text.empty()) text.push_back(' ');
      text += tok.surface;
    }
    corpus.pool.push_back(std::move(text));
  }
  return corpus;
}

}  // namespace adrmtl
