#ifndef ADRMTL_TRAINER_HPP
#define ADRMTL_TRAINER_HPP

#include <cstdint>
#include <vector>

#include "adrmtl/embeddings.hpp"
#include "adrmtl/network.hpp"
#include "adrmtl/text_pipeline.hpp"

namespace adrmtl {

struct Hyperparams {
  int d_h = 500;
  int d_l = kNumTags;
  int input_dim = 400;
  int max_epochs = 10;
  double learning_rate = 0.001;
  int adr_batch_size = 8;
  int ade_batch_size = 32;
  int selftrain_adr_batch_size = 64;
  double lambda = 0.8;
  double tau = 0.5;
  int layer_count = 1;
  std::uint64_t seed = 0;

  // Knobs the model description leaves open.
  double grad_clip_norm = 5.0;  // <= 0 disables
  bool masked_mean_pooling = false;
  bool train_embeddings = false;

  void validate() const;
};

// Adam accumulators, aligned with param_views order.
struct OptimizerState {
  std::vector<Eigen::VectorXd> first_moment;
  std::vector<Eigen::VectorXd> second_moment;
  long long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

OptimizerState make_optimizer_state(ModelParams& params);

// Standard adam update with bias correction. Throws NumericError on
// non-finite gradients.
void adam_step(ModelParams& params, ModelParams& grads, OptimizerState& state,
               double lr);

// Scales grads down to the given global L2 norm if they exceed it.
// Returns the pre-clip norm. max_norm <= 0 is a no-op.
double clip_global_norm(ModelParams& grads, double max_norm);

struct AdeExample {
  std::vector<Token> tokens;
  int label = 0;  // 1 = adverse event present
};

struct JointExample {
  LabeledSequence sequence;
  int ade_label = 0;
};

struct EpochLog {
  int epoch = 0;
  double adr_loss = 0.0;  // mean per-example loss over the epoch
  double ade_loss = 0.0;
  int adr_updates = 0;
  int ade_updates = 0;
};

struct TrainStats {
  std::vector<EpochLog> epochs;
};

// Batch-count schedule of the alternating multi-task loop. alpha is
// floor(M/N); the M mod N leftover ADE batches are spread one each over
// the first (M mod N) outer iterations so every ADE batch is used once
// per epoch.
struct UpdateSchedule {
  int adr_batches = 0;  // N
  int ade_batches = 0;  // M
  int alpha = 0;
  int remainder = 0;
};

UpdateSchedule make_update_schedule(std::size_t adr_examples,
                                    std::size_t ade_examples,
                                    const Hyperparams& hyper);

// Supervised tagging baseline: max_epochs passes of shuffled
// adr_batch_size minibatches minimizing the tagging cross-entropy.
ModelParams train_single_task(const std::vector<LabeledSequence>& adr_data,
                              const EmbeddingTable& table,
                              const Hyperparams& hyper,
                              TrainStats* stats = nullptr);

// Alternating multi-task loop: per outer iteration, a burst of ADE batch
// updates followed by one ADR batch update. Both heads share the
// bi-LSTM stack; each update touches only its own head.
ModelParams train_mtl(const std::vector<LabeledSequence>& adr_data,
                      const std::vector<AdeExample>& ade_data,
                      const EmbeddingTable& table, const Hyperparams& hyper,
                      TrainStats* stats = nullptr);

// Joint training on examples carrying both a tag sequence and an ADE
// label, minimizing the indicator-gated combined loss with one backward
// pass per batch.
ModelParams train_joint(const std::vector<JointExample>& joint_data,
                        const EmbeddingTable& table, const Hyperparams& hyper,
                        TrainStats* stats = nullptr);

// In-place fine-tuning pass used by self-training: `epochs` passes over
// the corpus at the given batch size, fresh optimizer, carrying the
// caller's parameters forward.
void fine_tune_adr(ModelParams& params,
                   const std::vector<LabeledSequence>& adr_data,
                   const EmbeddingTable& table, const Hyperparams& hyper,
                   int epochs, int batch_size, std::uint64_t shuffle_salt,
                   TrainStats* stats = nullptr);

// Embeds a sequence (token surfaces, padding to its own length already
// applied by the caller) through the lookup table.
std::vector<Eigen::VectorXd> embed_sequence(const std::vector<Token>& tokens,
                                            const EmbeddingTable& table);

}  // namespace adrmtl

#endif  // ADRMTL_TRAINER_HPP
