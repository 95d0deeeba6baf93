#include "adrmtl/weak_supervision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "adrmtl/errors.hpp"
#include "adrmtl/rng.hpp"
#include "parallel_util.hpp"

namespace adrmtl {

namespace {

using detail::parallel_for;

std::string join_surfaces(const std::vector<Token>& tokens,
                          std::size_t length) {
  std::string out;
  for (std::size_t i = 0; i < length && i < tokens.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i].surface;
  }
  return out;
}

std::vector<std::optional<ScoredSample>> score_pool(
    const ModelParams& params, const EmbeddingTable& table,
    const std::vector<std::vector<Token>>& pool, ScoreNorm norm, int threads) {
  std::vector<std::optional<ScoredSample>> scores(pool.size());
  parallel_for(pool.size(), threads, [&](std::size_t i) {
    scores[i] = score_sample(params, table, pool[i], norm);
  });
  return scores;
}

std::vector<std::vector<Token>> tokenize_pool(
    const std::vector<std::string>& pool) {
  std::vector<std::vector<Token>> out;
  for (const std::string& raw : pool) {
    std::vector<Token> tokens = tokenize(normalize_tweet(raw));
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

}  // namespace

std::optional<ScoredSample> score_sample(const ModelParams& params,
                                         const EmbeddingTable& table,
                                         const std::vector<Token>& tweet,
                                         ScoreNorm norm) {
  if (tweet.empty()) return std::nullopt;
  std::vector<Eigen::VectorXd> inputs = embed_sequence(tweet, table);
  ForwardTrace trace =
      bilstm_forward(params, inputs, std::vector<bool>(tweet.size(), true));
  std::vector<Tag> tags = decode_greedy(trace.adr_dists, tweet.size());

  double log_product = 0.0;
  std::size_t adr_count = 0;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] != Tag::IAdr) continue;
    log_product += std::log(
        std::max(trace.adr_dists[t][static_cast<int>(Tag::IAdr)], 1e-300));
    ++adr_count;
  }
  if (adr_count == 0) return std::nullopt;

  double product = std::exp(log_product);
  double score = norm == ScoreNorm::GeometricMean
                     ? std::exp(log_product / static_cast<double>(adr_count))
                     : product / static_cast<double>(adr_count);

  ScoredSample sample;
  sample.sequence.tokens = tweet;
  sample.sequence.tags = tags;
  sample.sequence.original_length = tweet.size();
  sample.score = score;
  sample.adr_token_count = adr_count;
  return sample;
}

SelfTrainResult self_train(const ModelParams& initial_params,
                           const std::vector<LabeledSequence>& adr_data,
                           const std::vector<std::string>& pool,
                           const SelfTrainConfig& cfg,
                           const EmbeddingTable& table,
                           const Hyperparams& hyper) {
  if (adr_data.empty()) throw ConfigError("ADR corpus is empty");
  if (cfg.max_iterations <= 0) {
    throw ConfigError("max_iterations must be positive");
  }
  if (cfg.tau < 0.0 || cfg.tau > 1.0) throw ConfigError("tau must be in [0,1]");

  SelfTrainResult result;
  result.params = initial_params;
  result.augmented = adr_data;
  std::vector<std::vector<Token>> remaining = tokenize_pool(pool);

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    if (remaining.empty()) break;
    result.iterations_run = iter;
    fine_tune_adr(result.params, result.augmented, table, hyper,
                  cfg.finetune_epochs, cfg.batch_size,
                  static_cast<std::uint64_t>(iter));

    auto scores = score_pool(result.params, table, remaining, cfg.score_norm,
                             cfg.threads);
    std::vector<std::vector<Token>> keep;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (scores[i].has_value() && scores[i]->score >= cfg.tau) {
        result.augmented.push_back(scores[i]->sequence);
        result.admissions.push_back(
            AdmissionRecord{iter, scores[i]->score, scores[i]->sequence});
      } else {
        keep.push_back(std::move(remaining[i]));
      }
    }
    remaining = std::move(keep);
    result.t_size_per_iteration.push_back(result.augmented.size());
  }
  result.pool_remaining = remaining.size();
  return result;
}

WeakDatasets generate_weak_datasets(const ModelParams& params,
                                    const EmbeddingTable& table,
                                    const std::vector<std::string>& fresh_pool,
                                    double tau, ScoreNorm norm,
                                    const std::vector<std::string>* prior_pool,
                                    int threads) {
  if (tau < 0.0 || tau > 1.0) throw ConfigError("tau must be in [0,1]");
  if (prior_pool != nullptr) {
    std::unordered_set<std::string> seen;
    for (const std::string& raw : *prior_pool) {
      seen.insert(normalize_tweet(raw));
    }
    for (const std::string& raw : fresh_pool) {
      if (seen.count(normalize_tweet(raw))) {
        throw DataError("fresh pool overlaps the self-training pool: " + raw);
      }
    }
  }

  std::vector<std::vector<Token>> members = tokenize_pool(fresh_pool);
  auto scores = score_pool(params, table, members, norm, threads);

  WeakDatasets out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    bool confident = scores[i].has_value() && scores[i]->score >= tau;
    AdeExample ade;
    ade.tokens = members[i];
    ade.label = confident ? 1 : 0;
    out.d_prime_ade.push_back(std::move(ade));
    if (confident) out.d_prime_adr.push_back(scores[i]->sequence);
  }
  return out;
}

std::vector<JointExample> build_joint_corpus(
    const std::vector<LabeledSequence>& gold, const WeakDatasets& weak,
    std::uint64_t seed, bool include_gold) {
  std::vector<JointExample> corpus;
  if (include_gold) {
    for (const LabeledSequence& seq : gold) {
      bool has_adr = std::any_of(
          seq.tags.begin(), seq.tags.begin() + seq.original_length,
          [](Tag t) { return t == Tag::IAdr; });
      corpus.push_back(JointExample{seq, has_adr ? 1 : 0});
    }
  }
  for (const LabeledSequence& seq : weak.d_prime_adr) {
    corpus.push_back(JointExample{seq, 1});
  }
  for (const AdeExample& ex : weak.d_prime_ade) {
    if (ex.label != 0) continue;  // label-1 members arrive via D'_ADR
    JointExample joint;
    joint.sequence.tokens = ex.tokens;
    joint.sequence.original_length = ex.tokens.size();
    joint.ade_label = 0;
    corpus.push_back(std::move(joint));
  }
  auto rng = substream(seed, "joint-corpus");
  std::shuffle(corpus.begin(), corpus.end(), rng);
  return corpus;
}

void write_ade_corpus(const std::string& path,
                      const std::vector<AdeExample>& corpus) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ADE corpus: " + path);
  for (const AdeExample& ex : corpus) {
    out << ex.label << '\t' << join_surfaces(ex.tokens, ex.tokens.size())
        << '\n';
  }
}

std::vector<AdeExample> read_ade_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ADE corpus: " + path);
  std::vector<AdeExample> corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected label<TAB>text");
    }
    std::string label = line.substr(0, tab);
    if (label != "0" && label != "1") {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": ADE label must be 0 or 1");
    }
    AdeExample ex;
    ex.label = label == "1" ? 1 : 0;
    ex.tokens = tokenize(line.substr(tab + 1));
    if (ex.tokens.empty()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": empty text");
    }
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

}  // namespace adrmtl
