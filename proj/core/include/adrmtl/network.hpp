#ifndef ADRMTL_NETWORK_HPP
#define ADRMTL_NETWORK_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "adrmtl/text_pipeline.hpp"

namespace adrmtl {

// One direction of one LSTM layer. Gate rows are stacked
// [input; forget; output; candidate], each block hidden_size tall.
struct LstmDirParams {
  Eigen::MatrixXd w_input;  // 4*d_h x in_dim
  Eigen::MatrixXd w_recur;  // 4*d_h x d_h
  Eigen::VectorXd bias;     // 4*d_h
};

struct LstmLayerParams {
  LstmDirParams fwd;
  LstmDirParams bwd;
};

// Shared bi-LSTM stack plus the two task heads. Also reused as the
// gradient container: gradients are shape-congruent by construction.
struct ModelParams {
  std::vector<LstmLayerParams> layers;
  Eigen::MatrixXd adr_weight;  // d_l x 2*d_h
  Eigen::VectorXd adr_bias;    // d_l
  Eigen::MatrixXd ade_weight;  // 2 x 2*d_h
  Eigen::VectorXd ade_bias;    // 2
  int hidden_size = 0;
  int label_count = 0;
  int input_dim = 0;
  std::uint64_t seed = 0;

  int layer_count() const { return static_cast<int>(layers.size()); }
};

// Flat view over one parameter block, used by the optimizer, the
// serializer and the finite-difference checks.
struct ParamView {
  std::string name;
  double* data;
  std::ptrdiff_t size;
};

std::vector<ParamView> param_views(ModelParams& params);
ModelParams zeros_like(const ModelParams& params);

// Glorot-uniform weights, zero biases except forget-gate biases at 1.0.
// Deterministic given seed.
ModelParams init_params(int hidden_size, int label_count, int input_dim,
                        int layers, std::uint64_t seed);

// Everything the backward pass needs, captured during forward.
struct DirTrace {
  // Per timestep, in sequence order (not scan order for the backward
  // direction): gate activations, cell state, hidden state.
  std::vector<Eigen::VectorXd> gate_in, gate_forget, gate_out, gate_cand;
  std::vector<Eigen::VectorXd> cell, hidden;
};

struct LayerTrace {
  std::vector<Eigen::VectorXd> inputs;  // layer input at each timestep
  DirTrace fwd;
  DirTrace bwd;
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  std::vector<Eigen::VectorXd> hidden;        // h_t, dimension 2*d_h
  Eigen::VectorXd pooled;                     // h = (1/n) sum h_t
  std::vector<Eigen::VectorXd> adr_dists;     // per-timestep d_l softmax
  Eigen::VectorXd ade_dist;                   // 2-class softmax
  std::vector<bool> mask;                     // true below original_length
  std::size_t length = 0;
  double pool_divisor = 1.0;
  bool masked_mean = false;
};

// Runs the stacked bi-LSTM over the embedded sequence and both heads.
// h_t concatenates the forward and backward hidden states; initial
// states are zero. Pooling divides by the full padded length unless
// masked_mean is set. Throws NumericError on non-finite input.
ForwardTrace bilstm_forward(const ModelParams& params,
                            const std::vector<Eigen::VectorXd>& embedded,
                            const std::vector<bool>& mask,
                            bool masked_mean = false);

// Head-only views of an existing trace.
std::vector<Eigen::VectorXd> adr_head_forward(const ForwardTrace& trace);
Eigen::VectorXd ade_head_forward(const ForwardTrace& trace);

// Cross-entropy over all n timesteps, PAD positions included.
double adr_loss(const std::vector<Eigen::VectorXd>& pred,
                const std::vector<Tag>& gold);
double ade_loss(const Eigen::VectorXd& pred, int gold_label);

// L = lambda * 1[ade_gold == 1] * L_ADR + (1 - lambda) * L_ADE
double joint_loss(double adr_component, double ade_component, int ade_gold,
                  double lambda);

enum class LossKind { Adr, Ade, Joint };

struct GoldLabels {
  std::vector<Tag> tags;  // required for Adr; for Joint when ade_label == 1
  int ade_label = 0;      // required for Ade and Joint
};

// Exact reverse-mode gradients of the selected loss for every parameter
// block, via backpropagation through time across both directions and all
// layers. Head blocks not on the selected loss path come back zero.
// input_grads, when given, receives the per-timestep gradient with
// respect to the embedded inputs (for trainable embeddings).
ModelParams backward(const ModelParams& params, const ForwardTrace& trace,
                     LossKind kind, const GoldLabels& gold,
                     double lambda = 1.0,
                     std::vector<Eigen::VectorXd>* input_grads = nullptr);

// Per-timestep argmax truncated to original_length; ties break toward
// the lowest label index.
std::vector<Tag> decode_greedy(const std::vector<Eigen::VectorXd>& pred,
                               std::size_t original_length);

// Checkpoint container; hexfloat text so round-trips are bitwise.
void save_checkpoint(const ModelParams& params, const std::string& path);
std::string checkpoint_to_string(const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace adrmtl

#endif  // ADRMTL_NETWORK_HPP
