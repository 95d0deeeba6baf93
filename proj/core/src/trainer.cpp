#include "adrmtl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "adrmtl/errors.hpp"
#include "adrmtl/rng.hpp"

namespace adrmtl {

void Hyperparams::validate() const {
  if (d_h <= 0 || d_l <= 0 || input_dim <= 0 || layer_count <= 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (max_epochs < 0) throw ConfigError("max_epochs must be nonnegative");
  if (learning_rate <= 0) throw ConfigError("learning_rate must be positive");
  if (adr_batch_size <= 0 || ade_batch_size <= 0 ||
      selftrain_adr_batch_size <= 0) {
    throw ConfigError("batch sizes must be positive");
  }
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0,1]");
  if (tau < 0.0 || tau > 1.0) throw ConfigError("tau must be in [0,1]");
}

OptimizerState make_optimizer_state(ModelParams& params) {
  OptimizerState state;
  for (const ParamView& view : param_views(params)) {
    state.first_moment.push_back(Eigen::VectorXd::Zero(view.size));
    state.second_moment.push_back(Eigen::VectorXd::Zero(view.size));
  }
  return state;
}

void adam_step(ModelParams& params, ModelParams& grads, OptimizerState& state,
               double lr) {
  auto pviews = param_views(params);
  auto gviews = param_views(grads);
  if (pviews.size() != state.first_moment.size()) {
    throw ConfigError("optimizer state does not match parameter layout");
  }
  ++state.step;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < pviews.size(); ++i) {
    Eigen::Map<Eigen::ArrayXd> theta(pviews[i].data, pviews[i].size);
    Eigen::Map<const Eigen::ArrayXd> g(gviews[i].data, gviews[i].size);
    if (!g.isFinite().all()) {
      throw NumericError("non-finite gradient in block " + gviews[i].name);
    }
    auto m = state.first_moment[i].array();
    auto v = state.second_moment[i].array();
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.square();
    theta -= lr * (m / bc1) / ((v / bc2).sqrt() + state.epsilon);
  }
}

double clip_global_norm(ModelParams& grads, double max_norm) {
  double sq = 0.0;
  auto views = param_views(grads);
  for (const ParamView& view : views) {
    Eigen::Map<const Eigen::VectorXd> g(view.data, view.size);
    sq += g.squaredNorm();
  }
  double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    double scale = max_norm / norm;
    for (const ParamView& view : views) {
      Eigen::Map<Eigen::VectorXd> g(view.data, view.size);
      g *= scale;
    }
  }
  return norm;
}

UpdateSchedule make_update_schedule(std::size_t adr_examples,
                                    std::size_t ade_examples,
                                    const Hyperparams& hyper) {
  auto batches = [](std::size_t count, int batch_size) {
    return static_cast<int>((count + static_cast<std::size_t>(batch_size) - 1) /
                            static_cast<std::size_t>(batch_size));
  };
  UpdateSchedule schedule;
  schedule.adr_batches = batches(adr_examples, hyper.adr_batch_size);
  schedule.ade_batches = batches(ade_examples, hyper.ade_batch_size);
  if (schedule.adr_batches < 1) throw ConfigError("ADR corpus is empty");
  schedule.alpha = schedule.ade_batches / schedule.adr_batches;
  schedule.remainder = schedule.ade_batches % schedule.adr_batches;
  return schedule;
}

std::vector<Eigen::VectorXd> embed_sequence(const std::vector<Token>& tokens,
                                            const EmbeddingTable& table) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(tokens.size());
  for (const Token& tok : tokens) out.push_back(table.lookup(tok.surface));
  return out;
}

namespace {

// Token vectors materialized per training run. When embeddings are
// trainable the store doubles as an extra parameter block with lazy
// per-vector adam state; the padding vector stays frozen at zero.
struct EmbeddingStore {
  int dim = 0;
  bool trainable = false;
  std::unordered_map<std::string, int> index;
  std::vector<Eigen::VectorXd> vectors;
  std::vector<Eigen::VectorXd> m, v;
  long long step = 0;
  int pad_id = -1;

  int intern(const std::string& word, const EmbeddingTable& table) {
    auto it = index.find(word);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(vectors.size());
    index.emplace(word, id);
    vectors.push_back(table.lookup(word));
    if (trainable) {
      m.push_back(Eigen::VectorXd::Zero(dim));
      v.push_back(Eigen::VectorXd::Zero(dim));
    }
    if (word == kPadToken) pad_id = id;
    return id;
  }
};

struct EncodedExample {
  std::vector<int> token_ids;
  std::vector<Tag> tags;
  std::vector<bool> mask;
  int ade_label = 0;
};

std::vector<EncodedExample> encode_adr_corpus(
    const std::vector<LabeledSequence>& corpus, EmbeddingStore& store,
    const EmbeddingTable& table) {
  std::size_t n = 0;
  for (const LabeledSequence& seq : corpus) {
    n = std::max(n, seq.original_length);
  }
  std::vector<EncodedExample> out;
  for (const LabeledSequence& seq : corpus) {
    LabeledSequence padded = pad_sequence(seq, n);
    EncodedExample ex;
    ex.tags = padded.tags;
    for (const Token& tok : padded.tokens) {
      ex.token_ids.push_back(store.intern(tok.surface, table));
    }
    for (std::size_t t = 0; t < n; ++t) {
      ex.mask.push_back(t < seq.original_length);
    }
    ex.ade_label = 0;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<EncodedExample> encode_ade_corpus(
    const std::vector<AdeExample>& corpus, EmbeddingStore& store,
    const EmbeddingTable& table) {
  std::size_t n = 0;
  for (const AdeExample& ex : corpus) n = std::max(n, ex.tokens.size());
  std::vector<EncodedExample> out;
  for (const AdeExample& ex : corpus) {
    EncodedExample enc;
    enc.ade_label = ex.label;
    for (const Token& tok : ex.tokens) {
      enc.token_ids.push_back(store.intern(tok.surface, table));
      enc.mask.push_back(true);
    }
    while (enc.token_ids.size() < n) {
      enc.token_ids.push_back(store.intern(kPadToken, table));
      enc.mask.push_back(false);
    }
    out.push_back(std::move(enc));
  }
  return out;
}

std::vector<EncodedExample> encode_joint_corpus(
    const std::vector<JointExample>& corpus, EmbeddingStore& store,
    const EmbeddingTable& table) {
  std::size_t n = 0;
  for (const JointExample& ex : corpus) {
    n = std::max(n, ex.sequence.original_length);
  }
  std::vector<EncodedExample> out;
  for (const JointExample& ex : corpus) {
    if (ex.ade_label == 1 &&
        ex.sequence.tags.size() < ex.sequence.original_length) {
      throw DataError("joint example with ADE label 1 is missing tags");
    }
    LabeledSequence seq = ex.sequence;
    if (seq.tags.size() < seq.original_length) {
      seq.tags.assign(seq.original_length, Tag::Outside);
    }
    LabeledSequence padded = pad_sequence(seq, n);
    EncodedExample enc;
    enc.ade_label = ex.ade_label;
    enc.tags = padded.tags;
    for (const Token& tok : padded.tokens) {
      enc.token_ids.push_back(store.intern(tok.surface, table));
    }
    for (std::size_t t = 0; t < n; ++t) {
      enc.mask.push_back(t < seq.original_length);
    }
    out.push_back(std::move(enc));
  }
  return out;
}

void add_scaled(ModelParams& acc, ModelParams& delta, double scale) {
  auto av = param_views(acc);
  auto dv = param_views(delta);
  for (std::size_t i = 0; i < av.size(); ++i) {
    Eigen::Map<Eigen::ArrayXd>(av[i].data, av[i].size) +=
        scale * Eigen::Map<const Eigen::ArrayXd>(dv[i].data, dv[i].size);
  }
}

struct TrainContext {
  ModelParams& params;
  OptimizerState& opt;
  EmbeddingStore& store;
  const Hyperparams& hyper;
};

// One minibatch update. Gradients are averaged over the batch so the
// learning rate is batch-size independent. Returns the summed
// per-example loss.
double run_batch(TrainContext& ctx, const std::vector<EncodedExample>& data,
                 const std::vector<std::size_t>& order, std::size_t begin,
                 std::size_t end, LossKind kind) {
  ModelParams grads = zeros_like(ctx.params);
  std::unordered_map<int, Eigen::VectorXd> emb_grads;
  double loss_sum = 0.0;
  std::size_t count = end - begin;
  for (std::size_t k = begin; k < end; ++k) {
    const EncodedExample& ex = data[order[k]];
    std::vector<Eigen::VectorXd> inputs;
    inputs.reserve(ex.token_ids.size());
    for (int id : ex.token_ids) inputs.push_back(ctx.store.vectors[id]);

    ForwardTrace trace = bilstm_forward(ctx.params, inputs, ex.mask,
                                        ctx.hyper.masked_mean_pooling);
    GoldLabels gold;
    gold.ade_label = ex.ade_label;
    double loss = 0.0;
    switch (kind) {
      case LossKind::Adr:
        gold.tags = ex.tags;
        loss = adr_loss(trace.adr_dists, ex.tags);
        break;
      case LossKind::Ade:
        loss = ade_loss(trace.ade_dist, ex.ade_label);
        break;
      case LossKind::Joint: {
        gold.tags = ex.tags;
        double adr_part =
            ex.ade_label == 1 ? adr_loss(trace.adr_dists, ex.tags) : 0.0;
        double ade_part = ade_loss(trace.ade_dist, ex.ade_label);
        loss = joint_loss(adr_part, ade_part, ex.ade_label, ctx.hyper.lambda);
        break;
      }
    }
    loss_sum += loss;

    std::vector<Eigen::VectorXd> input_grads;
    ModelParams g = backward(ctx.params, trace, kind, gold, ctx.hyper.lambda,
                             ctx.store.trainable ? &input_grads : nullptr);
    add_scaled(grads, g, 1.0 / static_cast<double>(count));
    if (ctx.store.trainable) {
      for (std::size_t t = 0; t < ex.token_ids.size(); ++t) {
        int id = ex.token_ids[t];
        if (id == ctx.store.pad_id) continue;
        auto [it, inserted] =
            emb_grads.try_emplace(id, Eigen::VectorXd::Zero(ctx.store.dim));
        it->second += input_grads[t] / static_cast<double>(count);
      }
    }
  }

  clip_global_norm(grads, ctx.hyper.grad_clip_norm);
  adam_step(ctx.params, grads, ctx.opt, ctx.hyper.learning_rate);

  if (ctx.store.trainable && !emb_grads.empty()) {
    ++ctx.store.step;
    double bc1 =
        1.0 - std::pow(ctx.opt.beta1, static_cast<double>(ctx.store.step));
    double bc2 =
        1.0 - std::pow(ctx.opt.beta2, static_cast<double>(ctx.store.step));
    // Lazy adam: only vectors touched by this batch are updated.
    for (auto& [id, g] : emb_grads) {
      auto m = ctx.store.m[id].array();
      auto v = ctx.store.v[id].array();
      m = ctx.opt.beta1 * m + (1.0 - ctx.opt.beta1) * g.array();
      v = ctx.opt.beta2 * v + (1.0 - ctx.opt.beta2) * g.array().square();
      ctx.store.vectors[id].array() -= ctx.hyper.learning_rate * (m / bc1) /
                                       ((v / bc2).sqrt() + ctx.opt.epsilon);
    }
  }
  return loss_sum;
}

std::vector<std::size_t> shuffled_order(std::size_t count, std::uint64_t seed,
                                        const std::string& stream) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  auto rng = substream(seed, stream);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

ModelParams train_single_task(const std::vector<LabeledSequence>& adr_data,
                              const EmbeddingTable& table,
                              const Hyperparams& hyper, TrainStats* stats) {
  hyper.validate();
  if (adr_data.empty()) throw ConfigError("ADR training corpus is empty");

  ModelParams params = init_params(hyper.d_h, hyper.d_l, hyper.input_dim,
                                   hyper.layer_count, hyper.seed);
  OptimizerState opt = make_optimizer_state(params);
  EmbeddingStore store{table.dimension(), hyper.train_embeddings};
  std::vector<EncodedExample> data = encode_adr_corpus(adr_data, store, table);
  TrainContext ctx{params, opt, store, hyper};

  std::size_t bs = static_cast<std::size_t>(hyper.adr_batch_size);
  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    auto order = shuffled_order(data.size(), hyper.seed,
                                "shuffle-adr-" + std::to_string(epoch));
    double loss_sum = 0.0;
    int updates = 0;
    for (std::size_t begin = 0; begin < data.size(); begin += bs) {
      std::size_t end = std::min(begin + bs, data.size());
      loss_sum += run_batch(ctx, data, order, begin, end, LossKind::Adr);
      ++updates;
    }
    if (stats != nullptr) {
      stats->epochs.push_back(EpochLog{
          epoch + 1, loss_sum / static_cast<double>(data.size()), 0.0, updates,
          0});
    }
  }
  return params;
}

ModelParams train_mtl(const std::vector<LabeledSequence>& adr_data,
                      const std::vector<AdeExample>& ade_data,
                      const EmbeddingTable& table, const Hyperparams& hyper,
                      TrainStats* stats) {
  hyper.validate();
  if (adr_data.empty()) throw ConfigError("ADR training corpus is empty");
  if (ade_data.empty()) throw ConfigError("ADE training corpus is empty");

  ModelParams params = init_params(hyper.d_h, hyper.d_l, hyper.input_dim,
                                   hyper.layer_count, hyper.seed);
  OptimizerState opt = make_optimizer_state(params);
  EmbeddingStore store{table.dimension(), hyper.train_embeddings};
  std::vector<EncodedExample> adr = encode_adr_corpus(adr_data, store, table);
  std::vector<EncodedExample> ade = encode_ade_corpus(ade_data, store, table);
  TrainContext ctx{params, opt, store, hyper};

  UpdateSchedule schedule =
      make_update_schedule(adr_data.size(), ade_data.size(), hyper);
  std::size_t adr_bs = static_cast<std::size_t>(hyper.adr_batch_size);
  std::size_t ade_bs = static_cast<std::size_t>(hyper.ade_batch_size);

  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    auto adr_order = shuffled_order(adr.size(), hyper.seed,
                                    "shuffle-adr-" + std::to_string(epoch));
    auto ade_order = shuffled_order(ade.size(), hyper.seed,
                                    "shuffle-ade-" + std::to_string(epoch));
    double adr_loss_sum = 0.0;
    double ade_loss_sum = 0.0;
    int adr_updates = 0;
    int ade_updates = 0;
    int ade_ptr = 0;
    for (int i = 1; i <= schedule.adr_batches; ++i) {
      int burst = schedule.alpha + (i <= schedule.remainder ? 1 : 0);
      for (int j = 0; j < burst; ++j) {
        int b = ade_ptr % schedule.ade_batches;
        std::size_t begin = static_cast<std::size_t>(b) * ade_bs;
        std::size_t end = std::min(begin + ade_bs, ade.size());
        ade_loss_sum += run_batch(ctx, ade, ade_order, begin, end,
                                  LossKind::Ade);
        ++ade_ptr;
        ++ade_updates;
      }
      std::size_t begin = static_cast<std::size_t>(i - 1) * adr_bs;
      std::size_t end = std::min(begin + adr_bs, adr.size());
      adr_loss_sum += run_batch(ctx, adr, adr_order, begin, end,
                                LossKind::Adr);
      ++adr_updates;
    }
    if (stats != nullptr) {
      double ade_mean = ade_updates > 0
                            ? ade_loss_sum / static_cast<double>(
                                                 ade_updates * ade_bs)
                            : 0.0;
      stats->epochs.push_back(
          EpochLog{epoch + 1, adr_loss_sum / static_cast<double>(adr.size()),
                   ade_mean, adr_updates, ade_updates});
    }
  }
  return params;
}

ModelParams train_joint(const std::vector<JointExample>& joint_data,
                        const EmbeddingTable& table, const Hyperparams& hyper,
                        TrainStats* stats) {
  hyper.validate();
  if (joint_data.empty()) throw ConfigError("joint training corpus is empty");

  ModelParams params = init_params(hyper.d_h, hyper.d_l, hyper.input_dim,
                                   hyper.layer_count, hyper.seed);
  OptimizerState opt = make_optimizer_state(params);
  EmbeddingStore store{table.dimension(), hyper.train_embeddings};
  std::vector<EncodedExample> data =
      encode_joint_corpus(joint_data, store, table);
  TrainContext ctx{params, opt, store, hyper};

  std::size_t bs = static_cast<std::size_t>(hyper.selftrain_adr_batch_size);
  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    auto order = shuffled_order(data.size(), hyper.seed,
                                "shuffle-joint-" + std::to_string(epoch));
    double loss_sum = 0.0;
    int updates = 0;
    for (std::size_t begin = 0; begin < data.size(); begin += bs) {
      std::size_t end = std::min(begin + bs, data.size());
      loss_sum += run_batch(ctx, data, order, begin, end, LossKind::Joint);
      ++updates;
    }
    if (stats != nullptr) {
      stats->epochs.push_back(EpochLog{
          epoch + 1, loss_sum / static_cast<double>(data.size()), 0.0, updates,
          0});
    }
  }
  return params;
}

void fine_tune_adr(ModelParams& params,
                   const std::vector<LabeledSequence>& adr_data,
                   const EmbeddingTable& table, const Hyperparams& hyper,
                   int epochs, int batch_size, std::uint64_t shuffle_salt,
                   TrainStats* stats) {
  hyper.validate();
  if (adr_data.empty()) throw ConfigError("ADR fine-tune corpus is empty");
  if (batch_size <= 0) throw ConfigError("batch size must be positive");

  OptimizerState opt = make_optimizer_state(params);
  EmbeddingStore store{table.dimension(), hyper.train_embeddings};
  std::vector<EncodedExample> data = encode_adr_corpus(adr_data, store, table);
  TrainContext ctx{params, opt, store, hyper};

  std::size_t bs = static_cast<std::size_t>(batch_size);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    auto order = shuffled_order(
        data.size(), hyper.seed,
        "selftrain-shuffle-" + std::to_string(shuffle_salt) + "-" +
            std::to_string(epoch));
    double loss_sum = 0.0;
    int updates = 0;
    for (std::size_t begin = 0; begin < data.size(); begin += bs) {
      std::size_t end = std::min(begin + bs, data.size());
      loss_sum += run_batch(ctx, data, order, begin, end, LossKind::Adr);
      ++updates;
    }
    if (stats != nullptr) {
      stats->epochs.push_back(EpochLog{
          epoch + 1, loss_sum / static_cast<double>(data.size()), 0.0, updates,
          0});
    }
  }
}

}  // namespace adrmtl
