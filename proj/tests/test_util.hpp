#ifndef ADRMTL_TESTS_TEST_UTIL_HPP
#define ADRMTL_TESTS_TEST_UTIL_HPP

#include <random>
#include <string>
#include <vector>

#include "adrmtl/network.hpp"

namespace adrmtl::testutil {

inline std::vector<Eigen::VectorXd> random_embedded(std::size_t n, int dim,
                                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t t = 0; t < n; ++t) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = dist(rng);
    out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<Tag> random_tags(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, kNumTags - 1);
  std::vector<Tag> tags;
  for (std::size_t t = 0; t < n; ++t) {
    tags.push_back(static_cast<Tag>(dist(rng)));
  }
  return tags;
}

inline double loss_value(const ModelParams& params,
                         const std::vector<Eigen::VectorXd>& embedded,
                         LossKind kind, const GoldLabels& gold,
                         double lambda) {
  ForwardTrace trace = bilstm_forward(
      params, embedded, std::vector<bool>(embedded.size(), true));
  switch (kind) {
    case LossKind::Adr:
      return adr_loss(trace.adr_dists, gold.tags);
    case LossKind::Ade:
      return ade_loss(trace.ade_dist, gold.ade_label);
    case LossKind::Joint: {
      double adr_part =
          gold.ade_label == 1 ? adr_loss(trace.adr_dists, gold.tags) : 0.0;
      double ade_part = ade_loss(trace.ade_dist, gold.ade_label);
      return joint_loss(adr_part, ade_part, gold.ade_label, lambda);
    }
  }
  return 0.0;
}

// Central finite differences over every parameter entry; the oracle the
// analytic backward pass is checked against.
inline ModelParams finite_difference_grads(
    const ModelParams& params, const std::vector<Eigen::VectorXd>& embedded,
    LossKind kind, const GoldLabels& gold, double lambda,
    double step = 1e-5) {
  ModelParams work = params;
  ModelParams grads = zeros_like(params);
  auto wviews = param_views(work);
  auto gviews = param_views(grads);
  for (std::size_t b = 0; b < wviews.size(); ++b) {
    for (std::ptrdiff_t i = 0; i < wviews[b].size; ++i) {
      double saved = wviews[b].data[i];
      wviews[b].data[i] = saved + step;
      double up = loss_value(work, embedded, kind, gold, lambda);
      wviews[b].data[i] = saved - step;
      double down = loss_value(work, embedded, kind, gold, lambda);
      wviews[b].data[i] = saved;
      gviews[b].data[i] = (up - down) / (2.0 * step);
    }
  }
  return grads;
}

struct GradMismatch {
  bool ok = true;
  std::string block;
  double analytic = 0.0;
  double numeric = 0.0;
};

// 1e-4 relative error with a 1e-6 absolute floor.
inline GradMismatch compare_grads(ModelParams& analytic, ModelParams& numeric,
                                  double rel_tol = 1e-4,
                                  double abs_floor = 1e-6) {
  auto av = param_views(analytic);
  auto nv = param_views(numeric);
  for (std::size_t b = 0; b < av.size(); ++b) {
    for (std::ptrdiff_t i = 0; i < av[b].size; ++i) {
      double a = av[b].data[i];
      double n = nv[b].data[i];
      double diff = std::abs(a - n);
      double scale = std::max(std::abs(a), std::abs(n));
      if (diff > rel_tol * scale && diff > abs_floor) {
        return GradMismatch{false, av[b].name, a, n};
      }
    }
  }
  return GradMismatch{};
}

}  // namespace adrmtl::testutil

#endif  // ADRMTL_TESTS_TEST_UTIL_HPP
