#ifndef ADRMTL_EVALUATION_HPP
#define ADRMTL_EVALUATION_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adrmtl/embeddings.hpp"
#include "adrmtl/network.hpp"
#include "adrmtl/text_pipeline.hpp"
#include "adrmtl/trainer.hpp"

namespace adrmtl {

struct MatchCounts {
  std::size_t matched_predicted = 0;
  std::size_t matched_gold = 0;
  std::size_t predicted_spans = 0;
  std::size_t gold_spans = 0;

  MatchCounts& operator+=(const MatchCounts& other);
};

struct PrfFragment {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  MatchCounts counts;
  bool degenerate = false;  // both span sets empty; metrics fixed at 0
};

struct EvalReport {
  PrfFragment aggregate;
  std::vector<PrfFragment> per_fold;
  double precision_std = 0.0;
  double recall_std = 0.0;
  double f1_std = 0.0;
};

// Lenient span match: a predicted span matches if it overlaps any gold
// span in at least one token position, and vice versa for recall.
// Empty denominators yield 0 by convention; raw counts are kept so
// consumers can reinterpret.
PrfFragment approx_match_prf(const std::vector<Span>& predicted,
                             const std::vector<Span>& gold,
                             bool exact_match = false);

PrfFragment prf_from_counts(const MatchCounts& counts);

// Greedy-decodes every test sequence (padded to the corpus maximum),
// keeps ADR spans only, and micro-aggregates counts corpus-wide.
PrfFragment evaluate_model(const ModelParams& params,
                           const std::vector<LabeledSequence>& test,
                           const EmbeddingTable& table,
                           bool exact_match = false, int threads = 1);

using TrainFn = std::function<ModelParams(
    const std::vector<LabeledSequence>& train, const Hyperparams& hyper)>;

// Seeded k-fold split (fold sizes differ by at most one); trains on the
// complement of each fold, evaluates on the fold, and reports per-fold
// metrics with their mean and population standard deviation.
EvalReport cross_validate(const std::vector<LabeledSequence>& corpus, int k,
                          const TrainFn& train_fn, const Hyperparams& hyper,
                          const EmbeddingTable& table, int threads = 1);

// Deterministic fold assignment used by cross_validate, exposed for
// inspection: result[i] is the fold of corpus[i].
std::vector<int> fold_assignment(std::size_t corpus_size, int k,
                                 std::uint64_t seed);

std::string report_to_table(const EvalReport& report);
std::string report_to_tsv(const EvalReport& report);

// Synthetic corpus generator: filler-token sequences with injected
// contiguous ADR phrases from a small lexicon; the ADE label is the
// presence of an injected phrase.
struct SyntheticSpec {
  std::size_t filler_vocab_size = 50;
  std::size_t adr_lexicon_size = 8;
  std::size_t adr_phrase_min_len = 1;
  std::size_t adr_phrase_max_len = 2;
  std::size_t seq_min_len = 5;
  std::size_t seq_max_len = 12;
  double injection_prob = 0.5;
  std::size_t adr_count = 50;
  std::size_t ade_count = 0;
  std::size_t pool_count = 0;
};

struct SyntheticCorpus {
  std::vector<LabeledSequence> adr;
  std::vector<AdeExample> ade;
  std::vector<std::string> pool;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec,
                                      std::uint64_t seed);

}  // namespace adrmtl

#endif  // ADRMTL_EVALUATION_HPP
