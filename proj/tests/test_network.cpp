#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "adrmtl/errors.hpp"
#include "adrmtl/network.hpp"
#include "test_util.hpp"

using namespace adrmtl;
using namespace adrmtl::testutil;

TEST_CASE("init_params shapes and determinism") {
  ModelParams p = init_params(500, 4, 400, 1, 3);
  CHECK(p.adr_weight.rows() == 4);
  CHECK(p.adr_weight.cols() == 1000);
  CHECK(p.ade_weight.rows() == 2);
  CHECK(p.ade_weight.cols() == 1000);
  CHECK(p.layers[0].fwd.w_input.cols() == 400);
  // Forget-gate bias block is 1, everything else 0.
  CHECK(p.layers[0].fwd.bias.segment(0, 500).norm() == 0.0);
  CHECK(p.layers[0].fwd.bias.segment(500, 500).minCoeff() == 1.0);
  CHECK(p.adr_bias.norm() == 0.0);

  ModelParams q = init_params(500, 4, 400, 1, 3);
  CHECK(checkpoint_to_string(p) == checkpoint_to_string(q));
  ModelParams r = init_params(500, 4, 400, 1, 4);
  CHECK(checkpoint_to_string(p) != checkpoint_to_string(r));
}

TEST_CASE("stacked layers take 2*d_h input and keep output shape") {
  std::mt19937_64 rng(5);
  for (int layers : {1, 2, 3}) {
    ModelParams p = init_params(6, 4, 10, layers, 11);
    if (layers > 1) {
      CHECK(p.layers[1].fwd.w_input.cols() == 12);
    }
    auto embedded = random_embedded(5, 10, rng);
    ForwardTrace trace =
        bilstm_forward(p, embedded, std::vector<bool>(5, true));
    CHECK(trace.hidden.size() == 5);
    CHECK(trace.hidden[0].size() == 12);
    for (const auto& h : trace.hidden) CHECK(h.allFinite());
    CHECK(trace.pooled.allFinite());
  }
}

TEST_CASE("zero parameters give zero hidden states") {
  ModelParams p = zeros_like(init_params(4, 4, 6, 1, 0));
  std::mt19937_64 rng(1);
  auto embedded = random_embedded(3, 6, rng);
  ForwardTrace trace = bilstm_forward(p, embedded, {});
  for (const auto& h : trace.hidden) CHECK(h.norm() == 0.0);
  // Uniform head outputs follow.
  for (const auto& dist : trace.adr_dists) {
    for (int i = 0; i < 4; ++i) CHECK(dist[i] == doctest::Approx(0.25));
  }
  CHECK(trace.ade_dist[0] == doctest::Approx(0.5));
}

TEST_CASE("reversing the input swaps forward and backward halves") {
  std::mt19937_64 rng(9);
  ModelParams p = init_params(5, 4, 8, 1, 21);
  // Same cell weights in both directions, so reversal mirrors exactly.
  p.layers[0].bwd = p.layers[0].fwd;
  auto embedded = random_embedded(6, 8, rng);
  auto reversed = embedded;
  std::reverse(reversed.begin(), reversed.end());

  ForwardTrace a = bilstm_forward(p, embedded, {});
  ForwardTrace b = bilstm_forward(p, reversed, {});
  for (std::size_t t = 0; t < 6; ++t) {
    Eigen::VectorXd fwd_half = a.hidden[t].segment(0, 5);
    Eigen::VectorXd mirror_bwd = b.hidden[5 - t].segment(5, 5);
    CHECK((fwd_half - mirror_bwd).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("length-1 sequence runs both directions on the same step") {
  std::mt19937_64 rng(2);
  ModelParams p = init_params(4, 4, 6, 1, 13);
  p.layers[0].bwd = p.layers[0].fwd;
  auto embedded = random_embedded(1, 6, rng);
  ForwardTrace trace = bilstm_forward(p, embedded, {});
  CHECK((trace.hidden[0].segment(0, 4) - trace.hidden[0].segment(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK(trace.pooled == trace.hidden[0]);
}

TEST_CASE("tagging head softmax") {
  std::mt19937_64 rng(3);
  ModelParams p = init_params(4, 4, 6, 1, 17);
  auto embedded = random_embedded(3, 6, rng);

  SUBCASE("zero head gives uniform distributions") {
    p.adr_weight.setZero();
    p.adr_bias.setZero();
    ForwardTrace trace = bilstm_forward(p, embedded, {});
    for (const auto& dist : adr_head_forward(trace)) {
      for (int i = 0; i < 4; ++i) CHECK(dist[i] == doctest::Approx(0.25));
    }
  }
  SUBCASE("bias ln 2 on one label") {
    p.adr_weight.setZero();
    p.adr_bias.setZero();
    p.adr_bias[0] = std::log(2.0);
    ForwardTrace trace = bilstm_forward(p, embedded, {});
    CHECK(trace.adr_dists[0][0] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(trace.adr_dists[0][1] == doctest::Approx(0.2).epsilon(1e-9));
  }
  SUBCASE("distributions sum to one and shift invariance holds") {
    ForwardTrace trace = bilstm_forward(p, embedded, {});
    for (const auto& dist : trace.adr_dists) {
      CHECK(dist.sum() == doctest::Approx(1.0).epsilon(1e-6));
    }
    // Adding a constant to all logits of one timestep: same distribution.
    ModelParams shifted = p;
    shifted.adr_bias.array() += 7.5;
    ForwardTrace strace = bilstm_forward(shifted, embedded, {});
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK((strace.adr_dists[t] - trace.adr_dists[t]).cwiseAbs().maxCoeff() <
            1e-9);
    }
  }
}

TEST_CASE("classification head pools the mean hidden state") {
  std::mt19937_64 rng(4);
  ModelParams p = init_params(4, 4, 6, 1, 19);
  auto embedded = random_embedded(5, 6, rng);
  ForwardTrace trace = bilstm_forward(p, embedded, {});
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
  for (const auto& h : trace.hidden) mean += h;
  mean /= 5.0;
  CHECK((trace.pooled - mean).cwiseAbs().maxCoeff() < 1e-12);

  p.ade_weight.setZero();
  p.ade_bias.setZero();
  ForwardTrace zero_head = bilstm_forward(p, embedded, {});
  CHECK(ade_head_forward(zero_head)[0] == doctest::Approx(0.5));

  auto single = random_embedded(1, 6, rng);
  ForwardTrace one = bilstm_forward(p, single, {});
  CHECK(one.pooled == one.hidden[0]);
}

TEST_CASE("loss values") {
  // Perfect prediction: zero loss.
  std::vector<Eigen::VectorXd> perfect(2, Eigen::VectorXd::Zero(4));
  perfect[0][0] = 1.0;
  perfect[1][2] = 1.0;
  CHECK(adr_loss(perfect, {Tag::IAdr, Tag::Outside}) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // One uniform timestep: ln 4.
  std::vector<Eigen::VectorXd> uniform(1, Eigen::VectorXd::Constant(4, 0.25));
  CHECK(adr_loss(uniform, {Tag::IOther}) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // Additivity over timesteps.
  std::mt19937_64 rng(6);
  std::vector<Eigen::VectorXd> a, b;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Random(4).array().abs() + 0.1;
    v /= v.sum();
    (i < 2 ? a : b).push_back(v);
  }
  std::vector<Eigen::VectorXd> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  auto ta = random_tags(2, rng);
  auto tb = random_tags(1, rng);
  auto tab = ta;
  tab.insert(tab.end(), tb.begin(), tb.end());
  CHECK(adr_loss(ab, tab) ==
        doctest::Approx(adr_loss(a, ta) + adr_loss(b, tb)).epsilon(1e-12));

  Eigen::Vector2d sure(1.0, 0.0);
  CHECK(ade_loss(sure, 0) == doctest::Approx(0.0).epsilon(1e-9));
  Eigen::Vector2d half(0.5, 0.5);
  CHECK(ade_loss(half, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  Eigen::Vector2d skew(0.9, 0.1);
  CHECK(ade_loss(skew, 1) == doctest::Approx(-std::log(0.1)).epsilon(1e-12));
}

TEST_CASE("joint loss gating and mixing") {
  CHECK(joint_loss(123.0, 0.5, 0, 0.8) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(joint_loss(1.5, 0.5, 1, 1.0) == doctest::Approx(1.5));
  CHECK(joint_loss(1.0, 0.5, 1, 0.8) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK_THROWS_AS(joint_loss(1.0, 1.0, 1, 1.5), ConfigError);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(7);
  for (int layers : {1, 2}) {
    std::size_t n = 5;
    int d_h = 8;
    int dim = 7;
    ModelParams p = init_params(d_h, kNumTags, dim, layers, 7 + layers);
    auto embedded = random_embedded(n, dim, rng);
    auto tags = random_tags(n, rng);

    for (LossKind kind : {LossKind::Adr, LossKind::Ade, LossKind::Joint}) {
      for (int ade_label : {0, 1}) {
        if (kind == LossKind::Adr && ade_label == 1) continue;
        GoldLabels gold{tags, ade_label};
        ForwardTrace trace = bilstm_forward(p, embedded, {});
        ModelParams analytic = backward(p, trace, kind, gold, 0.8);
        ModelParams numeric =
            finite_difference_grads(p, embedded, kind, gold, 0.8);
        GradMismatch m = compare_grads(analytic, numeric);
        INFO("layers=", layers, " kind=", static_cast<int>(kind),
             " ade=", ade_label, " block=", m.block, " a=", m.analytic,
             " n=", m.numeric);
        CHECK(m.ok);
      }
    }
  }
}

TEST_CASE("head separation in gradients") {
  std::mt19937_64 rng(8);
  ModelParams p = init_params(6, kNumTags, 5, 1, 31);
  auto embedded = random_embedded(4, 5, rng);
  auto tags = random_tags(4, rng);
  ForwardTrace trace = bilstm_forward(p, embedded, {});

  ModelParams g_adr = backward(p, trace, LossKind::Adr, GoldLabels{tags, 0});
  CHECK(g_adr.ade_weight.norm() == 0.0);
  CHECK(g_adr.ade_bias.norm() == 0.0);
  CHECK(g_adr.adr_weight.norm() > 0.0);

  ModelParams g_ade = backward(p, trace, LossKind::Ade, GoldLabels{{}, 1});
  CHECK(g_ade.adr_weight.norm() == 0.0);
  CHECK(g_ade.adr_bias.norm() == 0.0);
  CHECK(g_ade.ade_weight.norm() > 0.0);

  // Joint with ADE label 0: the indicator gates the tagging head off and
  // the result is independent of the gold tags.
  ModelParams g0 = backward(p, trace, LossKind::Joint, GoldLabels{tags, 0}, 0.8);
  CHECK(g0.adr_weight.norm() == 0.0);
  CHECK(g0.adr_bias.norm() == 0.0);
  auto other_tags = random_tags(4, rng);
  ModelParams g1 =
      backward(p, trace, LossKind::Joint, GoldLabels{other_tags, 0}, 0.8);
  auto v0 = param_views(g0);
  auto v1 = param_views(g1);
  for (std::size_t b = 0; b < v0.size(); ++b) {
    for (std::ptrdiff_t i = 0; i < v0[b].size; ++i) {
      CHECK(v0[b].data[i] == v1[b].data[i]);
    }
  }
}

TEST_CASE("decode_greedy") {
  std::vector<Eigen::VectorXd> uniform(3, Eigen::VectorXd::Constant(4, 0.25));
  CHECK(decode_greedy(uniform, 3) ==
        std::vector<Tag>{Tag::IAdr, Tag::IAdr, Tag::IAdr});

  std::vector<Eigen::VectorXd> onehot(2, Eigen::VectorXd::Zero(4));
  onehot[0][2] = 1.0;
  onehot[1][1] = 1.0;
  CHECK(decode_greedy(onehot, 2) ==
        std::vector<Tag>{Tag::Outside, Tag::IOther});

  Eigen::VectorXd row(4);
  row << 0.1, 0.2, 0.6, 0.1;
  CHECK(decode_greedy({row}, 1) == std::vector<Tag>{Tag::Outside});

  // Truncation to original_length.
  CHECK(decode_greedy(uniform, 2).size() == 2);
}

TEST_CASE("checkpoint round-trips bitwise") {
  ModelParams p = init_params(7, 4, 9, 2, 99);
  std::string path = "test_checkpoint.txt";
  save_checkpoint(p, path);
  ModelParams q = load_checkpoint(path);
  CHECK(checkpoint_to_string(p) == checkpoint_to_string(q));
  CHECK(q.hidden_size == 7);
  CHECK(q.layer_count() == 2);
  CHECK(q.seed == 99);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint("missing_checkpoint.txt"), IoError);
}

TEST_CASE("non-finite input raises a numeric error") {
  ModelParams p = init_params(4, 4, 3, 1, 1);
  std::vector<Eigen::VectorXd> bad(2, Eigen::VectorXd::Zero(3));
  bad[1][0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bilstm_forward(p, bad, {}), NumericError);
}
