#ifndef ADRMTL_WEAK_SUPERVISION_HPP
#define ADRMTL_WEAK_SUPERVISION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adrmtl/embeddings.hpp"
#include "adrmtl/network.hpp"
#include "adrmtl/text_pipeline.hpp"
#include "adrmtl/trainer.hpp"

namespace adrmtl {

// How "product of ADR probabilities normalized by the ADR word count"
// is read. Geometric mean keeps scores length-comparable in (0, 1];
// DivideByCount is the literal division, kept for comparison.
enum class ScoreNorm { GeometricMean, DivideByCount };

struct ScoredSample {
  LabeledSequence sequence;  // decoded tags attached
  double score = 0.0;
  std::size_t adr_token_count = 0;
};

struct SelfTrainConfig {
  double tau = 0.5;
  int max_iterations = 5;
  int batch_size = 64;
  int finetune_epochs = 3;
  ScoreNorm score_norm = ScoreNorm::GeometricMean;
  int threads = 1;
};

// Greedy-decodes the tweet and scores it by its I-ADR probabilities.
// Samples with no decoded I-ADR token are filtered (no score).
std::optional<ScoredSample> score_sample(
    const ModelParams& params, const EmbeddingTable& table,
    const std::vector<Token>& tweet,
    ScoreNorm norm = ScoreNorm::GeometricMean);

struct AdmissionRecord {
  int iteration = 0;
  double score = 0.0;
  LabeledSequence sequence;
};

struct SelfTrainResult {
  ModelParams params;
  std::vector<LabeledSequence> augmented;  // T
  std::vector<AdmissionRecord> admissions;
  std::vector<std::size_t> t_size_per_iteration;
  std::size_t pool_remaining = 0;
  int iterations_run = 0;
};

// Self-training loop: fine-tune on T, score the pool, move members
// scoring >= tau into T with their decoded tags. Parameters carry over
// between iterations. Stops at max_iterations or when the pool is
// exhausted, whichever occurs first.
SelfTrainResult self_train(const ModelParams& initial_params,
                           const std::vector<LabeledSequence>& adr_data,
                           const std::vector<std::string>& pool,
                           const SelfTrainConfig& cfg,
                           const EmbeddingTable& table,
                           const Hyperparams& hyper);

struct WeakDatasets {
  std::vector<LabeledSequence> d_prime_adr;
  std::vector<AdeExample> d_prime_ade;
};

// Partitions the fresh pool: members scoring >= tau go to D'_ADR with
// decoded tags and to D'_ADE with label 1; all others to D'_ADE with
// label 0. When prior_pool is given, any overlap (by normalized text)
// is an input error.
WeakDatasets generate_weak_datasets(
    const ModelParams& params, const EmbeddingTable& table,
    const std::vector<std::string>& fresh_pool, double tau,
    ScoreNorm norm = ScoreNorm::GeometricMean,
    const std::vector<std::string>* prior_pool = nullptr, int threads = 1);

// Merges gold data (ADE label derived from I-ADR presence) with the
// weak datasets into one shuffled joint corpus. include_gold follows
// the default of training on gold plus generated data.
std::vector<JointExample> build_joint_corpus(
    const std::vector<LabeledSequence>& gold, const WeakDatasets& weak,
    std::uint64_t seed, bool include_gold = true);

// D'_ADE file format: one "label<TAB>text" line per example.
void write_ade_corpus(const std::string& path,
                      const std::vector<AdeExample>& corpus);
std::vector<AdeExample> read_ade_corpus(const std::string& path);

}  // namespace adrmtl

#endif  // ADRMTL_WEAK_SUPERVISION_HPP
