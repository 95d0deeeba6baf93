// adrmtl command-line harness: dataset plumbing, training modes,
// weak-supervision generation, evaluation, and ablation sweeps.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adrmtl/errors.hpp"
#include "adrmtl/evaluation.hpp"
#include "adrmtl/network.hpp"
#include "adrmtl/rng.hpp"
#include "adrmtl/trainer.hpp"
#include "adrmtl/weak_supervision.hpp"

namespace fs = std::filesystem;
using namespace adrmtl;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Flat key=value configuration. Defaults first, then the config file,
// then command-line overrides; later layers win. The resolved map is
// the manifest.
class Config {
 public:
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string trimmed = line.substr(0, line.find('#'));
      auto start = trimmed.find_first_not_of(" \t\r");
      if (start == std::string::npos) continue;
      auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected key=value");
      }
      auto strip = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      std::string key = strip(trimmed.substr(0, eq));
      std::string value = strip(trimmed.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
      }
      values_[key] = value;
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  long integer(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stol(it->second);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not an integer: " +
                        it->second);
    }
  }

  double real(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not a number: " +
                        it->second);
    }
  }

  bool flag(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "1" || it->second == "true") return true;
    if (it->second == "0" || it->second == "false") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: " +
                      it->second);
  }

  std::string manifest(const std::string& mode) const {
    std::ostringstream os;
    os << "mode=" << mode << "\n";
    for (const auto& [key, value] : values_) {
      os << key << "=" << value << "\n";
    }
    return os.str();
  }

 private:
  std::map<std::string, std::string> values_;
};

struct Paths {
  fs::path out;

  fs::path in_out(const std::string& name) const { return out / name; }
};

Hyperparams hyper_from(const Config& cfg) {
  Hyperparams h;
  h.d_h = static_cast<int>(cfg.integer("d_h", h.d_h));
  h.input_dim = static_cast<int>(cfg.integer("input_dim", h.input_dim));
  h.max_epochs = static_cast<int>(cfg.integer("epochs", h.max_epochs));
  h.learning_rate = cfg.real("lr", h.learning_rate);
  h.adr_batch_size =
      static_cast<int>(cfg.integer("adr_batch", h.adr_batch_size));
  h.ade_batch_size =
      static_cast<int>(cfg.integer("ade_batch", h.ade_batch_size));
  h.selftrain_adr_batch_size = static_cast<int>(
      cfg.integer("joint_batch", h.selftrain_adr_batch_size));
  h.lambda = cfg.real("lambda", h.lambda);
  h.tau = cfg.real("tau", h.tau);
  h.layer_count = static_cast<int>(cfg.integer("layers", h.layer_count));
  h.seed = static_cast<std::uint64_t>(cfg.integer("seed", 0));
  h.grad_clip_norm = cfg.real("grad_clip", h.grad_clip_norm);
  h.masked_mean_pooling = cfg.flag("masked_mean", h.masked_mean_pooling);
  h.train_embeddings = cfg.flag("train_embeddings", h.train_embeddings);
  h.validate();
  return h;
}

SelfTrainConfig selftrain_from(const Config& cfg, const Hyperparams& h) {
  SelfTrainConfig st;
  st.tau = h.tau;
  st.max_iterations =
      static_cast<int>(cfg.integer("selftrain_iters", st.max_iterations));
  st.batch_size =
      static_cast<int>(cfg.integer("selftrain_batch", st.batch_size));
  st.finetune_epochs =
      static_cast<int>(cfg.integer("selftrain_epochs", st.finetune_epochs));
  st.threads = static_cast<int>(cfg.integer("threads", 1));
  std::string norm = cfg.str("score_norm", "geometric");
  if (norm == "geometric") {
    st.score_norm = ScoreNorm::GeometricMean;
  } else if (norm == "divide") {
    st.score_norm = ScoreNorm::DivideByCount;
  } else {
    throw ConfigError("score_norm must be 'geometric' or 'divide'");
  }
  if (st.max_iterations < 1 || st.batch_size < 1 || st.finetune_epochs < 0) {
    throw ConfigError("self-training iteration/batch/epoch counts invalid");
  }
  return st;
}

SyntheticSpec synth_from(const Config& cfg) {
  SyntheticSpec spec;
  spec.adr_count =
      static_cast<std::size_t>(cfg.integer("synth_adr", 200));
  spec.ade_count = static_cast<std::size_t>(cfg.integer("synth_ade", 0));
  spec.pool_count = static_cast<std::size_t>(cfg.integer("synth_pool", 0));
  spec.filler_vocab_size =
      static_cast<std::size_t>(cfg.integer("synth_vocab", 50));
  spec.adr_lexicon_size =
      static_cast<std::size_t>(cfg.integer("synth_lexicon", 8));
  spec.seq_min_len = static_cast<std::size_t>(cfg.integer("synth_min_len", 5));
  spec.seq_max_len = static_cast<std::size_t>(cfg.integer("synth_max_len", 12));
  spec.injection_prob = cfg.real("synth_inject", 0.5);
  return spec;
}

EmbeddingTable embeddings_from(const Config& cfg, const Hyperparams& h) {
  std::string path = cfg.str("embeddings", "");
  if (!path.empty()) {
    return EmbeddingTable::load(path, h.input_dim, h.seed);
  }
  if (!cfg.flag("synthetic_embeddings", false)) {
    throw ConfigError(
        "this mode needs --embeddings (or synthetic_embeddings=1 to use "
        "deterministic fallback vectors)");
  }
  return EmbeddingTable(h.input_dim, h.seed);
}

void write_text(const fs::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
}

void write_manifest(const Paths& paths, const Config& cfg,
                    const std::string& mode) {
  write_text(paths.in_out("manifest.txt"), cfg.manifest(mode));
}

void write_metrics(const Paths& paths, const TrainStats& stats) {
  std::ostringstream os;
  os << "epoch\tadr_loss\tade_loss\tadr_updates\tade_updates\n";
  for (const EpochLog& e : stats.epochs) {
    os << e.epoch << "\t" << e.adr_loss << "\t" << e.ade_loss << "\t"
       << e.adr_updates << "\t" << e.ade_updates << "\n";
  }
  write_text(paths.in_out("metrics.tsv"), os.str());
}

std::vector<LabeledSequence> require_adr(const Config& cfg) {
  std::string path = cfg.str("adr_data", "");
  if (path.empty()) throw ConfigError("this mode needs --adr-data");
  return read_labeled_corpus(path);
}

std::vector<AdeExample> require_ade(const Config& cfg) {
  std::string path = cfg.str("ade_data", "");
  if (path.empty()) throw ConfigError("this mode needs --ade-data");
  return read_ade_corpus(path);
}

std::vector<std::string> require_pool(const Config& cfg) {
  std::string path = cfg.str("pool", "");
  if (path.empty()) throw ConfigError("this mode needs --pool");
  return read_unlabeled_corpus(path);
}

ModelParams require_checkpoint(const Config& cfg) {
  std::string path = cfg.str("checkpoint", "");
  if (path.empty()) throw ConfigError("this mode needs --checkpoint");
  return load_checkpoint(path);
}

// ---- modes ----------------------------------------------------------------

int run_preprocess(const Config& cfg, const Paths& paths) {
  std::vector<std::string> raw = require_pool(cfg);
  std::ostringstream os;
  std::size_t tokens = 0;
  for (const std::string& tweet : raw) {
    std::string normalized = normalize_tweet(tweet);
    tokens += tokenize(normalized).size();
    os << normalized << "\n";
  }
  write_text(paths.in_out("normalized.txt"), os.str());
  std::cout << raw.size() << " tweets, " << tokens << " tokens -> "
            << paths.in_out("normalized.txt").string() << "\n";
  return 0;
}

int run_synth_gen(const Config& cfg, const Paths& paths,
                  const Hyperparams& h) {
  SyntheticCorpus data = make_synthetic_corpus(synth_from(cfg), h.seed);
  write_labeled_corpus(paths.in_out("adr.tsv").string(), data.adr);
  write_ade_corpus(paths.in_out("ade.tsv").string(), data.ade);
  std::ostringstream pool;
  for (const std::string& tweet : data.pool) pool << tweet << "\n";
  write_text(paths.in_out("pool.txt"), pool.str());
  std::cout << "wrote " << data.adr.size() << " tagged / " << data.ade.size()
            << " labeled / " << data.pool.size() << " unlabeled sequences\n";
  return 0;
}

int run_train_single(const Config& cfg, const Paths& paths,
                     const Hyperparams& h) {
  EmbeddingTable table = embeddings_from(cfg, h);
  TrainStats stats;
  ModelParams params = train_single_task(require_adr(cfg), table, h, &stats);
  save_checkpoint(params, paths.in_out("checkpoint.txt").string());
  write_metrics(paths, stats);
  std::cout << "checkpoint -> " << paths.in_out("checkpoint.txt").string()
            << "\n";
  return 0;
}

int run_train_mtl(const Config& cfg, const Paths& paths,
                  const Hyperparams& h) {
  EmbeddingTable table = embeddings_from(cfg, h);
  TrainStats stats;
  ModelParams params =
      train_mtl(require_adr(cfg), require_ade(cfg), table, h, &stats);
  save_checkpoint(params, paths.in_out("checkpoint.txt").string());
  write_metrics(paths, stats);
  std::cout << "checkpoint -> " << paths.in_out("checkpoint.txt").string()
            << "\n";
  return 0;
}

int run_train_joint(const Config& cfg, const Paths& paths,
                    const Hyperparams& h) {
  EmbeddingTable table = embeddings_from(cfg, h);
  WeakDatasets weak;
  std::string weak_adr = cfg.str("weak_adr", "");
  std::string weak_ade = cfg.str("weak_ade", "");
  if (!weak_adr.empty()) weak.d_prime_adr = read_labeled_corpus(weak_adr);
  if (!weak_ade.empty()) weak.d_prime_ade = read_ade_corpus(weak_ade);
  std::vector<JointExample> corpus = build_joint_corpus(
      require_adr(cfg), weak, h.seed, cfg.flag("include_gold", true));
  TrainStats stats;
  ModelParams params = train_joint(corpus, table, h, &stats);
  save_checkpoint(params, paths.in_out("checkpoint.txt").string());
  write_metrics(paths, stats);
  std::cout << "trained on " << corpus.size() << " joint examples\n";
  return 0;
}

int run_self_train(const Config& cfg, const Paths& paths,
                   const Hyperparams& h) {
  EmbeddingTable table = embeddings_from(cfg, h);
  SelfTrainConfig st = selftrain_from(cfg, h);
  ModelParams init =
      cfg.str("checkpoint", "").empty()
          ? init_params(h.d_h, h.d_l, h.input_dim, h.layer_count, h.seed)
          : require_checkpoint(cfg);
  SelfTrainResult result =
      self_train(init, require_adr(cfg), require_pool(cfg), st, table, h);
  save_checkpoint(result.params, paths.in_out("checkpoint.txt").string());
  write_labeled_corpus(paths.in_out("augmented.tsv").string(),
                       result.augmented);
  std::ostringstream os;
  os << "iteration\tscore\ttokens\n";
  for (const AdmissionRecord& rec : result.admissions) {
    os << rec.iteration << "\t" << rec.score << "\t"
       << rec.sequence.original_length << "\n";
  }
  write_text(paths.in_out("admissions.tsv"), os.str());
  std::cout << result.admissions.size() << " admissions over "
            << result.iterations_run << " iterations; "
            << result.pool_remaining << " pool members left\n";
  return 0;
}

int run_gen_weak(const Config& cfg, const Paths& paths, const Hyperparams& h) {
  EmbeddingTable table = embeddings_from(cfg, h);
  SelfTrainConfig st = selftrain_from(cfg, h);
  ModelParams params = require_checkpoint(cfg);
  std::vector<std::string> prior;
  std::string prior_path = cfg.str("prior_pool", "");
  if (!prior_path.empty()) prior = read_unlabeled_corpus(prior_path);
  WeakDatasets weak = generate_weak_datasets(
      params, table, require_pool(cfg), h.tau, st.score_norm,
      prior.empty() ? nullptr : &prior, st.threads);
  write_labeled_corpus(paths.in_out("weak_adr.tsv").string(),
                       weak.d_prime_adr);
  write_ade_corpus(paths.in_out("weak_ade.tsv").string(), weak.d_prime_ade);
  std::cout << weak.d_prime_adr.size() << " weak tagged / "
            << weak.d_prime_ade.size() << " weak labeled examples\n";
  return 0;
}

int run_evaluate(const Config& cfg, const Paths& paths, const Hyperparams& h) {
  EmbeddingTable table = embeddings_from(cfg, h);
  ModelParams params = require_checkpoint(cfg);
  bool exact = cfg.flag("exact_match", false);
  int threads = static_cast<int>(cfg.integer("threads", 1));
  PrfFragment frag =
      evaluate_model(params, require_adr(cfg), table, exact, threads);
  EvalReport report;
  report.aggregate = frag;
  write_text(paths.in_out("report.tsv"), report_to_tsv(report));
  std::cout << report_to_table(report);
  return 0;
}

TrainFn trainer_for(const Config& cfg, const EmbeddingTable& table,
                    const std::vector<AdeExample>& ade) {
  if (ade.empty()) {
    return [&table](const std::vector<LabeledSequence>& train_set,
                    const Hyperparams& hyper) {
      return train_single_task(train_set, table, hyper);
    };
  }
  return [&table, &ade](const std::vector<LabeledSequence>& train_set,
                        const Hyperparams& hyper) {
    return train_mtl(train_set, ade, table, hyper);
  };
}

int run_cross_validate(const Config& cfg, const Paths& paths,
                       const Hyperparams& h) {
  EmbeddingTable table = embeddings_from(cfg, h);
  std::vector<LabeledSequence> corpus = require_adr(cfg);
  std::vector<AdeExample> ade;
  if (!cfg.str("ade_data", "").empty()) ade = require_ade(cfg);
  int k = static_cast<int>(cfg.integer("k", 10));
  int threads = static_cast<int>(cfg.integer("threads", 1));
  EvalReport report = cross_validate(corpus, k, trainer_for(cfg, table, ade),
                                     h, table, threads);
  write_text(paths.in_out("report.tsv"), report_to_tsv(report));
  write_text(paths.in_out("report.txt"), report_to_table(report));
  std::cout << report_to_table(report);
  return 0;
}

int run_grad_check(const Hyperparams& base) {
  std::mt19937_64 rng = substream(base.seed, "grad-check");
  std::uniform_real_distribution<double> val(-0.5, 0.5);
  std::uniform_int_distribution<int> ade_dist(0, 1);
  const double rel_tol = 1e-4, abs_floor = 1e-6;
  int checked = 0;

  for (int layers : {1, 2}) {
    ModelParams params = init_params(4, kNumTags, 5, layers, base.seed + 7);
    std::size_t n = 4;
    std::vector<Eigen::VectorXd> embedded;
    for (std::size_t t = 0; t < n; ++t) {
      Eigen::VectorXd v(5);
      for (int i = 0; i < 5; ++i) v[i] = val(rng);
      embedded.push_back(std::move(v));
    }
    GoldLabels gold;
    std::uniform_int_distribution<int> tag_dist(0, kNumTags - 1);
    for (std::size_t t = 0; t < n; ++t) {
      gold.tags.push_back(static_cast<Tag>(tag_dist(rng)));
    }
    gold.ade_label = ade_dist(rng);

    auto loss_at = [&](LossKind kind) {
      ForwardTrace trace = bilstm_forward(params, embedded,
                                          std::vector<bool>(n, true));
      switch (kind) {
        case LossKind::Adr:
          return adr_loss(trace.adr_dists, gold.tags);
        case LossKind::Ade:
          return ade_loss(trace.ade_dist, gold.ade_label);
        case LossKind::Joint: {
          double adr = gold.ade_label == 1
                           ? adr_loss(trace.adr_dists, gold.tags)
                           : 0.0;
          return joint_loss(adr, ade_loss(trace.ade_dist, gold.ade_label),
                            gold.ade_label, base.lambda);
        }
      }
      return 0.0;
    };

    for (LossKind kind : {LossKind::Adr, LossKind::Ade, LossKind::Joint}) {
      ForwardTrace trace = bilstm_forward(params, embedded,
                                          std::vector<bool>(n, true));
      ModelParams analytic = backward(params, trace, kind, gold, base.lambda);
      auto views = param_views(params);
      auto grads = param_views(analytic);
      for (std::size_t b = 0; b < views.size(); ++b) {
        for (std::ptrdiff_t i = 0; i < views[b].size; ++i) {
          double saved = views[b].data[i];
          const double step = 1e-5;
          views[b].data[i] = saved + step;
          double up = loss_at(kind);
          views[b].data[i] = saved - step;
          double down = loss_at(kind);
          views[b].data[i] = saved;
          double numeric = (up - down) / (2.0 * step);
          double analytic_val = grads[b].data[i];
          double diff = std::abs(analytic_val - numeric);
          double scale = std::max(std::abs(analytic_val), std::abs(numeric));
          ++checked;
          if (diff > rel_tol * scale && diff > abs_floor) {
            std::cerr << "gradient mismatch in " << views[b].name
                      << " entry " << i << ": analytic " << analytic_val
                      << " vs numeric " << numeric << "\n";
            return 1;
          }
        }
      }
    }
  }
  std::cout << checked << " gradient entries verified against finite "
            << "differences\n";
  return 0;
}

int run_ablate(const Config& cfg, const Paths& paths, const Hyperparams& h) {
  EmbeddingTable table = embeddings_from(cfg, h);
  std::vector<LabeledSequence> corpus = require_adr(cfg);
  std::string axis = cfg.str("axis", "");
  int k = static_cast<int>(cfg.integer("k", 5));
  int threads = static_cast<int>(cfg.integer("threads", 1));

  std::ostringstream os;
  os << "axis\tsetting\tprecision\trecall\tf1\tf1_std\n";
  auto emit = [&os, &axis](const std::string& setting,
                           const EvalReport& report) {
    os << axis << "\t" << setting << "\t" << report.aggregate.precision
       << "\t" << report.aggregate.recall << "\t" << report.aggregate.f1
       << "\t" << report.f1_std << "\n";
  };

  if (axis == "ade-fraction") {
    std::vector<AdeExample> ade = require_ade(cfg);
    for (int percent : {20, 40, 60, 80, 100}) {
      std::vector<AdeExample> slice(
          ade.begin(), ade.begin() + ade.size() * percent / 100);
      TrainFn train = [&table, &slice](
                          const std::vector<LabeledSequence>& train_set,
                          const Hyperparams& hyper) {
        return train_mtl(train_set, slice, table, hyper);
      };
      emit(std::to_string(percent) + "%",
           cross_validate(corpus, k, train, h, table, threads));
    }
  } else if (axis == "pool-fraction") {
    std::vector<std::string> pool = require_pool(cfg);
    SelfTrainConfig st = selftrain_from(cfg, h);
    for (int percent : {25, 50, 75, 100}) {
      std::vector<std::string> slice(
          pool.begin(), pool.begin() + pool.size() * percent / 100);
      TrainFn train = [&table, &slice, &st](
                          const std::vector<LabeledSequence>& train_set,
                          const Hyperparams& hyper) {
        ModelParams init = init_params(hyper.d_h, hyper.d_l, hyper.input_dim,
                                       hyper.layer_count, hyper.seed);
        return self_train(init, train_set, slice, st, table, hyper).params;
      };
      emit(std::to_string(percent) + "%",
           cross_validate(corpus, k, train, h, table, threads));
    }
  } else if (axis == "layers") {
    for (int layers : {1, 2, 3}) {
      Hyperparams deep = h;
      deep.layer_count = layers;
      TrainFn train = [&table](const std::vector<LabeledSequence>& train_set,
                               const Hyperparams& hyper) {
        return train_single_task(train_set, table, hyper);
      };
      emit(std::to_string(layers),
           cross_validate(corpus, k, train, deep, table, threads));
    }
  } else {
    throw ConfigError(
        "--axis must be one of ade-fraction, pool-fraction, layers");
  }

  write_text(paths.in_out("sweep.tsv"), os.str());
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bi-LSTM tagging/classification pipeline"};
  app.get_formatter()->column_width(30);

  std::string mode, config_path, adr_data, ade_data, pool, embeddings, out,
      checkpoint, axis;
  long seed = -1, threads = -1, k = -1, layers = -1, epochs = -1;
  double lambda = -1.0, tau = -1.0;
  bool synthetic_embeddings = false;

  app.add_option("--mode", mode,
                 "preprocess|train-single|train-mtl|self-train|gen-weak|"
                 "train-joint|evaluate|cross-validate|grad-check|synth-gen|"
                 "ablate")
      ->required();
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--adr-data", adr_data, "tagged corpus path");
  app.add_option("--ade-data", ade_data, "labeled corpus path");
  app.add_option("--pool", pool, "unlabeled corpus path");
  app.add_option("--embeddings", embeddings, "word-vector file path");
  app.add_option("--checkpoint", checkpoint, "model checkpoint path");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "run seed");
  app.add_option("--threads", threads, "worker thread cap");
  app.add_option("--k", k, "cross-validation folds");
  app.add_option("--lambda", lambda, "joint-loss mixing weight");
  app.add_option("--tau", tau, "confidence threshold");
  app.add_option("--layers", layers, "stacked layer count");
  app.add_option("--epochs", epochs, "training epochs");
  app.add_option("--axis", axis, "ablation axis");
  app.add_flag("--synthetic-embeddings", synthetic_embeddings,
               "use deterministic fallback vectors instead of a file");

  try {
    app.parse(argc, argv);

    Config cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    // Command-line values override the file.
    if (!adr_data.empty()) cfg.set("adr_data", adr_data);
    if (!ade_data.empty()) cfg.set("ade_data", ade_data);
    if (!pool.empty()) cfg.set("pool", pool);
    if (!embeddings.empty()) cfg.set("embeddings", embeddings);
    if (!checkpoint.empty()) cfg.set("checkpoint", checkpoint);
    if (!axis.empty()) cfg.set("axis", axis);
    if (seed >= 0) cfg.set("seed", std::to_string(seed));
    if (threads >= 0) cfg.set("threads", std::to_string(threads));
    if (k >= 0) cfg.set("k", std::to_string(k));
    if (layers >= 0) cfg.set("layers", std::to_string(layers));
    if (epochs >= 0) cfg.set("epochs", std::to_string(epochs));
    if (lambda >= 0.0) cfg.set("lambda", std::to_string(lambda));
    if (tau >= 0.0) cfg.set("tau", std::to_string(tau));
    if (synthetic_embeddings) cfg.set("synthetic_embeddings", "1");

    Hyperparams h = hyper_from(cfg);

    Paths paths;
    paths.out = out.empty() ? fs::path(cfg.str("out", ".")) : fs::path(out);
    fs::create_directories(paths.out);
    write_manifest(paths, cfg, mode);

    if (mode == "preprocess") return run_preprocess(cfg, paths);
    if (mode == "synth-gen") return run_synth_gen(cfg, paths, h);
    if (mode == "train-single") return run_train_single(cfg, paths, h);
    if (mode == "train-mtl") return run_train_mtl(cfg, paths, h);
    if (mode == "train-joint") return run_train_joint(cfg, paths, h);
    if (mode == "self-train") return run_self_train(cfg, paths, h);
    if (mode == "gen-weak") return run_gen_weak(cfg, paths, h);
    if (mode == "evaluate") return run_evaluate(cfg, paths, h);
    if (mode == "cross-validate") return run_cross_validate(cfg, paths, h);
    if (mode == "grad-check") return run_grad_check(h);
    if (mode == "ablate") return run_ablate(cfg, paths, h);
    throw ConfigError("unknown mode: " + mode);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
