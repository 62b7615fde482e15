#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "strnn/numerics.hpp"

namespace strnn {

struct LossConfig {
  double lambda1 = 0.0;  // spatial projection L1 weight
  double lambda2 = 0.0;  // temporal projection L1 weight
  std::size_t class_count = 2;

  void validate() const {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw Error("loss: L1 weights must be nonnegative");
    if (class_count < 2) throw Error("loss: at least two classes required");
  }
};

inline constexpr double kProbabilityFloor = 1e-300;

inline Vector softmax(const Vector& logits) {
  if (logits.empty()) throw ShapeError("softmax: empty logits");
  const double top = *std::max_element(logits.values().begin(), logits.values().end());
  Vector p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  p *= 1.0 / total;
  return p;
}

/// -log P(label), clamping P at kProbabilityFloor. Sets clamped when the floor applied.
inline double negative_log_likelihood(const Vector& probs, std::uint32_t label, bool* clamped = nullptr) {
  if (label >= probs.size()) throw Error("loss: label " + std::to_string(label) + " out of range");
  double p = probs[label];
  const bool hit = !(p >= kProbabilityFloor);
  if (hit) p = kProbabilityFloor;
  if (clamped) *clamped = hit;
  return -std::log(p);
}

/// dE/do = P - onehot(label).
inline Vector cross_entropy_logit_grad(const Vector& probs, std::uint32_t label) {
  if (label >= probs.size()) throw Error("loss: label " + std::to_string(label) + " out of range");
  Vector g = probs;
  g[label] -= 1.0;
  return g;
}

/// Sum of column L1 norms, equal to the entrywise L1 norm.
inline double projection_l1(const Matrix& g) {
  double total = 0.0;
  for (std::size_t c = 0; c < g.cols(); ++c) {
    double col = 0.0;
    for (std::size_t r = 0; r < g.rows(); ++r) col += std::abs(g(r, c));
    total += col;
  }
  return total;
}

inline double sign_or_zero(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// grad += scale * sign(g), with sign(0) = 0.
inline void add_l1_subgradient(const Matrix& g, double scale, Matrix& grad) {
  if (g.rows() != grad.rows() || g.cols() != grad.cols()) throw ShapeError("l1 subgradient: shape mismatch");
  auto out = grad.values();
  const auto in = g.values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] += scale * sign_or_zero(in[i]);
}

struct ObjectiveValue {
  double data = 0.0;     // summed negative log-likelihood
  double penalty = 0.0;  // weighted L1 terms
  std::size_t clamped = 0;
  double total() const noexcept { return data + penalty; }
};

/// Projection matrices entering the sparsity terms.
struct ProjectionSet {
  std::vector<const Matrix*> spatial;   // G^r for every direction
  std::vector<const Matrix*> temporal;  // G^f, G^b
};

inline double projection_penalty(const ProjectionSet& projections, const LossConfig& cfg) {
  double spatial = 0.0, temporal = 0.0;
  for (const auto* g : projections.spatial) spatial += projection_l1(*g);
  for (const auto* g : projections.temporal) temporal += projection_l1(*g);
  return cfg.lambda1 * spatial + cfg.lambda2 * temporal;
}

/// Summed cross entropy over samples plus the L1 penalties.
inline ObjectiveValue objective(std::span<const Vector> probs, std::span<const std::uint32_t> labels,
                                const ProjectionSet& projections, const LossConfig& cfg) {
  cfg.validate();
  if (probs.size() != labels.size()) throw ShapeError("objective: one label per sample required");
  ObjectiveValue v;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i].size() != cfg.class_count) throw ShapeError("objective: probability vector length");
    bool clamped = false;
    v.data += negative_log_likelihood(probs[i], labels[i], &clamped);
    if (clamped) ++v.clamped;
  }
  v.penalty = projection_penalty(projections, cfg);
  return v;
}

}  // namespace strnn
