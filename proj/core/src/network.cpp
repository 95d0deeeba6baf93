#include "adrmtl/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "adrmtl/errors.hpp"
#include "adrmtl/rng.hpp"

namespace adrmtl {

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
  Eigen::ArrayXd exps = shifted.exp();
  return (exps / exps.sum()).matrix();
}

double safe_log(double p) { return std::log(std::max(p, 1e-12)); }

void glorot_fill(Eigen::MatrixXd& m, std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
}

ModelParams alloc_params(int d_h, int d_l, int input_dim, int layers) {
  ModelParams p;
  p.hidden_size = d_h;
  p.label_count = d_l;
  p.input_dim = input_dim;
  for (int l = 0; l < layers; ++l) {
    int in = l == 0 ? input_dim : 2 * d_h;
    LstmLayerParams layer;
    for (LstmDirParams* dir : {&layer.fwd, &layer.bwd}) {
      dir->w_input = Eigen::MatrixXd::Zero(4 * d_h, in);
      dir->w_recur = Eigen::MatrixXd::Zero(4 * d_h, d_h);
      dir->bias = Eigen::VectorXd::Zero(4 * d_h);
    }
    p.layers.push_back(std::move(layer));
  }
  p.adr_weight = Eigen::MatrixXd::Zero(d_l, 2 * d_h);
  p.adr_bias = Eigen::VectorXd::Zero(d_l);
  p.ade_weight = Eigen::MatrixXd::Zero(2, 2 * d_h);
  p.ade_bias = Eigen::VectorXd::Zero(2);
  return p;
}

}  // namespace

std::vector<ParamView> param_views(ModelParams& params) {
  std::vector<ParamView> views;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    std::string prefix = "layer" + std::to_string(l) + ".";
    auto add_dir = [&](const std::string& name, LstmDirParams& dir) {
      views.push_back({prefix + name + ".w_input", dir.w_input.data(),
                       dir.w_input.size()});
      views.push_back({prefix + name + ".w_recur", dir.w_recur.data(),
                       dir.w_recur.size()});
      views.push_back({prefix + name + ".bias", dir.bias.data(),
                       dir.bias.size()});
    };
    add_dir("fwd", params.layers[l].fwd);
    add_dir("bwd", params.layers[l].bwd);
  }
  views.push_back(
      {"adr.weight", params.adr_weight.data(), params.adr_weight.size()});
  views.push_back({"adr.bias", params.adr_bias.data(), params.adr_bias.size()});
  views.push_back(
      {"ade.weight", params.ade_weight.data(), params.ade_weight.size()});
  views.push_back({"ade.bias", params.ade_bias.data(), params.ade_bias.size()});
  return views;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = alloc_params(params.hidden_size, params.label_count,
                               params.input_dim, params.layer_count());
  z.seed = params.seed;
  return z;
}

ModelParams init_params(int hidden_size, int label_count, int input_dim,
                        int layers, std::uint64_t seed) {
  if (hidden_size <= 0 || label_count <= 0 || input_dim <= 0 || layers <= 0) {
    throw ConfigError("model dimensions must be positive");
  }
  ModelParams p = alloc_params(hidden_size, label_count, input_dim, layers);
  p.seed = seed;
  auto rng = substream(seed, "init");
  for (LstmLayerParams& layer : p.layers) {
    for (LstmDirParams* dir : {&layer.fwd, &layer.bwd}) {
      glorot_fill(dir->w_input, rng);
      glorot_fill(dir->w_recur, rng);
      // Forget-gate biases start at 1.0 to let gradients flow early.
      dir->bias.segment(hidden_size, hidden_size).setOnes();
    }
  }
  glorot_fill(p.adr_weight, rng);
  glorot_fill(p.ade_weight, rng);
  return p;
}

namespace {

// Runs one LSTM direction over the layer inputs. `order` is the
// processing order of sequence indices (forward: 0..n-1, backward:
// n-1..0). Results are stored by sequence index.
void run_direction(const LstmDirParams& dir,
                   const std::vector<Eigen::VectorXd>& inputs,
                   const std::vector<std::size_t>& order, int d_h,
                   DirTrace& trace) {
  std::size_t n = inputs.size();
  trace.gate_in.resize(n);
  trace.gate_forget.resize(n);
  trace.gate_out.resize(n);
  trace.gate_cand.resize(n);
  trace.cell.resize(n);
  trace.hidden.resize(n);

  Eigen::VectorXd h = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d_h);
  for (std::size_t t : order) {
    Eigen::VectorXd z = dir.w_input * inputs[t] + dir.w_recur * h + dir.bias;
    Eigen::ArrayXd gi = (1.0 / (1.0 + (-z.segment(0, d_h).array()).exp()));
    Eigen::ArrayXd gf = (1.0 / (1.0 + (-z.segment(d_h, d_h).array()).exp()));
    Eigen::ArrayXd go =
        (1.0 / (1.0 + (-z.segment(2 * d_h, d_h).array()).exp()));
    Eigen::ArrayXd gg = z.segment(3 * d_h, d_h).array().tanh();
    c = (gf * c.array() + gi * gg).matrix();
    h = (go * c.array().tanh()).matrix();
    trace.gate_in[t] = gi.matrix();
    trace.gate_forget[t] = gf.matrix();
    trace.gate_out[t] = go.matrix();
    trace.gate_cand[t] = gg.matrix();
    trace.cell[t] = c;
    trace.hidden[t] = h;
  }
}

}  // namespace

ForwardTrace bilstm_forward(const ModelParams& params,
                            const std::vector<Eigen::VectorXd>& embedded,
                            const std::vector<bool>& mask,
                            bool masked_mean) {
  std::size_t n = embedded.size();
  if (n == 0) throw DataError("cannot run the transducer on an empty sequence");
  for (const Eigen::VectorXd& e : embedded) {
    if (e.size() != params.input_dim) {
      throw DataError("embedding dimension does not match the model");
    }
    if (!e.allFinite()) throw NumericError("non-finite embedding input");
  }

  int d_h = params.hidden_size;
  std::vector<std::size_t> fwd_order(n), bwd_order(n);
  for (std::size_t t = 0; t < n; ++t) {
    fwd_order[t] = t;
    bwd_order[t] = n - 1 - t;
  }

  ForwardTrace trace;
  trace.length = n;
  trace.mask = mask.empty() ? std::vector<bool>(n, true) : mask;
  const std::vector<Eigen::VectorXd>* inputs = &embedded;
  for (const LstmLayerParams& layer : params.layers) {
    LayerTrace lt;
    lt.inputs = *inputs;
    run_direction(layer.fwd, lt.inputs, fwd_order, d_h, lt.fwd);
    run_direction(layer.bwd, lt.inputs, bwd_order, d_h, lt.bwd);
    std::vector<Eigen::VectorXd> concat(n);
    for (std::size_t t = 0; t < n; ++t) {
      Eigen::VectorXd h(2 * d_h);
      h << lt.fwd.hidden[t], lt.bwd.hidden[t];
      concat[t] = std::move(h);
    }
    trace.layers.push_back(std::move(lt));
    trace.hidden = std::move(concat);
    inputs = &trace.hidden;
  }

  trace.masked_mean = masked_mean;
  trace.pooled = Eigen::VectorXd::Zero(2 * d_h);
  std::size_t pooled_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (masked_mean && !trace.mask[t]) continue;
    trace.pooled += trace.hidden[t];
    ++pooled_count;
  }
  trace.pool_divisor = static_cast<double>(std::max<std::size_t>(pooled_count, 1));
  trace.pooled /= trace.pool_divisor;

  trace.adr_dists.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    trace.adr_dists[t] =
        softmax(params.adr_weight * trace.hidden[t] + params.adr_bias);
  }
  trace.ade_dist = softmax(params.ade_weight * trace.pooled + params.ade_bias);

  if (!trace.pooled.allFinite() || !trace.ade_dist.allFinite()) {
    throw NumericError("non-finite activations in forward pass");
  }
  return trace;
}

std::vector<Eigen::VectorXd> adr_head_forward(const ForwardTrace& trace) {
  return trace.adr_dists;
}

Eigen::VectorXd ade_head_forward(const ForwardTrace& trace) {
  return trace.ade_dist;
}

double adr_loss(const std::vector<Eigen::VectorXd>& pred,
                const std::vector<Tag>& gold) {
  if (pred.size() != gold.size()) {
    throw DataError("prediction/gold length mismatch in tagging loss");
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    loss -= safe_log(pred[t][static_cast<int>(gold[t])]);
  }
  return loss;
}

double ade_loss(const Eigen::VectorXd& pred, int gold_label) {
  if (gold_label != 0 && gold_label != 1) {
    throw DataError("ADE label must be 0 or 1");
  }
  return -safe_log(pred[gold_label]);
}

double joint_loss(double adr_component, double ade_component, int ade_gold,
                  double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  double gate = ade_gold == 1 ? 1.0 : 0.0;
  return lambda * gate * adr_component + (1.0 - lambda) * ade_component;
}

namespace {

// BPTT through one direction. dh_ext holds the gradient arriving at each
// hidden state from above; d_inputs accumulates the gradient passed to
// the layer below.
void direction_backward(const LstmDirParams& dir, const DirTrace& trace,
                        const std::vector<Eigen::VectorXd>& inputs,
                        const std::vector<Eigen::VectorXd>& dh_ext,
                        bool reversed, int d_h, LstmDirParams& grads,
                        std::vector<Eigen::VectorXd>& d_inputs) {
  std::size_t n = inputs.size();
  Eigen::VectorXd carry_dh = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd carry_dc = Eigen::VectorXd::Zero(d_h);
  for (std::size_t step = 0; step < n; ++step) {
    // Visit steps in reverse processing order; the carry flows to the
    // step processed just before this one.
    std::size_t t = reversed ? step : n - 1 - step;
    bool has_prev = reversed ? t + 1 < n : t > 0;
    std::size_t prev = reversed ? t + 1 : t - 1;

    const Eigen::ArrayXd gi = trace.gate_in[t].array();
    const Eigen::ArrayXd gf = trace.gate_forget[t].array();
    const Eigen::ArrayXd go = trace.gate_out[t].array();
    const Eigen::ArrayXd gg = trace.gate_cand[t].array();
    const Eigen::ArrayXd tc = trace.cell[t].array().tanh();
    Eigen::ArrayXd prev_c = has_prev
                                ? trace.cell[prev].array()
                                : Eigen::ArrayXd::Zero(d_h).eval();

    Eigen::ArrayXd dh = (dh_ext[t] + carry_dh).array();
    Eigen::ArrayXd d_out = dh * tc;
    Eigen::ArrayXd dc = carry_dc.array() + dh * go * (1.0 - tc * tc);

    Eigen::VectorXd dz(4 * d_h);
    dz.segment(0, d_h) = (dc * gg * gi * (1.0 - gi)).matrix();
    dz.segment(d_h, d_h) = (dc * prev_c * gf * (1.0 - gf)).matrix();
    dz.segment(2 * d_h, d_h) = (d_out * go * (1.0 - go)).matrix();
    dz.segment(3 * d_h, d_h) = (dc * gi * (1.0 - gg * gg)).matrix();

    grads.w_input.noalias() += dz * inputs[t].transpose();
    if (has_prev) {
      grads.w_recur.noalias() += dz * trace.hidden[prev].transpose();
    }
    grads.bias += dz;
    d_inputs[t].noalias() += dir.w_input.transpose() * dz;
    carry_dh.noalias() = dir.w_recur.transpose() * dz;
    carry_dc = (dc * gf).matrix();
  }
}

}  // namespace

ModelParams backward(const ModelParams& params, const ForwardTrace& trace,
                     LossKind kind, const GoldLabels& gold, double lambda,
                     std::vector<Eigen::VectorXd>* input_grads) {
  std::size_t n = trace.length;
  int d_h = params.hidden_size;
  ModelParams grads = zeros_like(params);

  double adr_scale = 0.0;
  double ade_scale = 0.0;
  switch (kind) {
    case LossKind::Adr:
      adr_scale = 1.0;
      break;
    case LossKind::Ade:
      ade_scale = 1.0;
      break;
    case LossKind::Joint:
      if (lambda < 0.0 || lambda > 1.0) {
        throw ConfigError("lambda must lie in [0, 1]");
      }
      adr_scale = gold.ade_label == 1 ? lambda : 0.0;
      ade_scale = 1.0 - lambda;
      break;
  }

  std::vector<Eigen::VectorXd> d_hidden(n,
                                        Eigen::VectorXd::Zero(2 * d_h));

  if (adr_scale != 0.0) {
    if (gold.tags.size() != n) {
      throw DataError("gold tag sequence length mismatch");
    }
    for (std::size_t t = 0; t < n; ++t) {
      Eigen::VectorXd dlogits = trace.adr_dists[t];
      dlogits[static_cast<int>(gold.tags[t])] -= 1.0;
      dlogits *= adr_scale;
      grads.adr_weight.noalias() += dlogits * trace.hidden[t].transpose();
      grads.adr_bias += dlogits;
      d_hidden[t].noalias() += params.adr_weight.transpose() * dlogits;
    }
  }
  if (ade_scale != 0.0) {
    Eigen::VectorXd dlogits = trace.ade_dist;
    dlogits[gold.ade_label] -= 1.0;
    dlogits *= ade_scale;
    grads.ade_weight.noalias() = dlogits * trace.pooled.transpose();
    grads.ade_bias = dlogits;
    Eigen::VectorXd pooled_back =
        params.ade_weight.transpose() * dlogits / trace.pool_divisor;
    for (std::size_t t = 0; t < n; ++t) {
      if (trace.masked_mean && !trace.mask[t]) continue;
      d_hidden[t] += pooled_back;
    }
  }

  // Walk the stack top-down; each layer converts gradient at its concat
  // output into gradient at its input.
  for (int l = params.layer_count() - 1; l >= 0; --l) {
    const LayerTrace& lt = trace.layers[static_cast<std::size_t>(l)];
    LstmLayerParams& glayer = grads.layers[static_cast<std::size_t>(l)];
    const LstmLayerParams& player = params.layers[static_cast<std::size_t>(l)];

    std::vector<Eigen::VectorXd> dh_fwd(n), dh_bwd(n);
    for (std::size_t t = 0; t < n; ++t) {
      dh_fwd[t] = d_hidden[t].segment(0, d_h);
      dh_bwd[t] = d_hidden[t].segment(d_h, d_h);
    }
    std::vector<Eigen::VectorXd> d_inputs(
        n, Eigen::VectorXd::Zero(lt.inputs[0].size()));
    direction_backward(player.fwd, lt.fwd, lt.inputs, dh_fwd, false, d_h,
                       glayer.fwd, d_inputs);
    direction_backward(player.bwd, lt.bwd, lt.inputs, dh_bwd, true, d_h,
                       glayer.bwd, d_inputs);
    if (l > 0) {
      d_hidden = std::move(d_inputs);
    } else if (input_grads != nullptr) {
      *input_grads = std::move(d_inputs);
    }
  }

  for (ParamView& view : param_views(grads)) {
    for (std::ptrdiff_t i = 0; i < view.size; ++i) {
      if (!std::isfinite(view.data[i])) {
        throw NumericError("non-finite gradient in block " + view.name);
      }
    }
  }
  return grads;
}

std::vector<Tag> decode_greedy(const std::vector<Eigen::VectorXd>& pred,
                               std::size_t original_length) {
  std::vector<Tag> tags;
  std::size_t limit = std::min(original_length, pred.size());
  for (std::size_t t = 0; t < limit; ++t) {
    int best = 0;
    for (int i = 1; i < pred[t].size(); ++i) {
      if (pred[t][i] > pred[t][best]) best = i;
    }
    tags.push_back(static_cast<Tag>(best));
  }
  return tags;
}

std::string checkpoint_to_string(const ModelParams& params) {
  std::ostringstream out;
  out << "adrmtl-checkpoint 1\n";
  out << "d_h " << params.hidden_size << "\n";
  out << "d_l " << params.label_count << "\n";
  out << "input_dim " << params.input_dim << "\n";
  out << "layer_count " << params.layer_count() << "\n";
  out << "seed " << params.seed << "\n";
  char buf[64];
  ModelParams& mutable_params = const_cast<ModelParams&>(params);
  for (const ParamView& view : param_views(mutable_params)) {
    out << "block " << view.name << " " << view.size << "\n";
    for (std::ptrdiff_t i = 0; i < view.size; ++i) {
      std::snprintf(buf, sizeof(buf), "%a", view.data[i]);
      out << buf << (i + 1 == view.size ? "\n" : " ");
    }
    if (view.size == 0) out << "\n";
  }
  return out.str();
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << checkpoint_to_string(params);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "adrmtl-checkpoint" || version != 1) {
    throw DataError("unrecognized checkpoint header in " + path);
  }
  auto read_field = [&](const std::string& want) -> long long {
    std::string key;
    long long value = 0;
    if (!(in >> key >> value) || key != want) {
      throw DataError("malformed checkpoint field, expected " + want);
    }
    return value;
  };
  int d_h = static_cast<int>(read_field("d_h"));
  int d_l = static_cast<int>(read_field("d_l"));
  int input_dim = static_cast<int>(read_field("input_dim"));
  int layers = static_cast<int>(read_field("layer_count"));
  std::string key;
  std::uint64_t seed = 0;
  if (!(in >> key >> seed) || key != "seed") {
    throw DataError("malformed checkpoint field, expected seed");
  }

  ModelParams params = alloc_params(d_h, d_l, input_dim, layers);
  params.seed = seed;
  for (ParamView& view : param_views(params)) {
    std::string block_kw, name;
    std::ptrdiff_t size = 0;
    if (!(in >> block_kw >> name >> size) || block_kw != "block" ||
        name != view.name || size != view.size) {
      throw DataError("checkpoint block mismatch at " + view.name);
    }
    std::string value;
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      if (!(in >> value)) throw DataError("truncated checkpoint block " + name);
      view.data[i] = std::strtod(value.c_str(), nullptr);
    }
  }
  return params;
}

}  // namespace adrmtl
