#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strnn/loss.hpp"
#include "strnn/model.hpp"
#include "strnn/numerics.hpp"
#include "strnn/parallel.hpp"
#include "strnn/volume.hpp"

namespace strnn {

struct TrainConfig {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  std::size_t epochs = 100;
  std::size_t batch_size = 10;
  std::uint64_t seed = 0;
  std::optional<double> grad_clip = 5.0;  // global L2 norm

  void validate() const {
    if (!(learning_rate >= 0.0)) throw Error("train config: learning_rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("train config: momentum must be in [0, 1)");
    if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
    if (grad_clip && !(*grad_clip > 0.0)) throw Error("train config: grad_clip must be positive");
  }
};

struct EpochMetrics {
  std::size_t epoch = 0;   // 1-based
  double data_loss = 0.0;  // summed NLL over the epoch, at pre-update parameters
  double penalty = 0.0;    // weighted L1 terms after the epoch
  double train_accuracy = 0.0;
  std::size_t clamped = 0;
};

namespace detail {

inline void check_dataset(const StrnnModel& model, const Dataset& data) {
  if (!data.labeled()) throw Error("dataset: labels required");
  for (const auto& s : data.samples) model.check_volume(s);
  for (auto y : data.labels)
    if (y >= model.config().classes)
      throw Error("dataset: label " + std::to_string(y) + " out of range for " +
                  std::to_string(model.config().classes) + " classes");
}

inline void add_into(StrnnParams& acc, const StrnnParams& g) {
  std::vector<std::span<double>> dst;
  StrnnParams::visit(acc, [&](const std::string&, auto& t) { dst.push_back(t.values()); });
  std::size_t i = 0;
  StrnnParams::visit(g, [&](const std::string&, const auto& t) {
    auto src = t.values();
    auto out = dst[i++];
    for (std::size_t k = 0; k < src.size(); ++k) out[k] += src[k];
  });
}

inline void zero(StrnnParams& p) {
  StrnnParams::visit(p, [](const std::string&, auto& t) { t.fill(0.0); });
}

}  // namespace detail

struct BatchResult {
  ObjectiveValue value;
  std::size_t correct = 0;
};

/// Data-term value and gradient summed over the selected samples. Per-sample
/// work runs in parallel; the sum is reduced in index order.
inline BatchResult batch_gradient(const StrnnModel& model, const Dataset& data, std::span<const std::size_t> indices,
                                  StrnnParams& grads) {
  BatchResult out;
  const std::size_t workers = std::max<std::size_t>(1, std::min(thread_count(), indices.size()));
  std::vector<StrnnParams> buffers(workers, StrnnParams::zeros(model.config()));
  std::vector<double> nll(workers);
  std::vector<char> hit(workers), clamped(workers);

  for (std::size_t start = 0; start < indices.size(); start += workers) {
    const std::size_t n = std::min(workers, indices.size() - start);
    parallel_for(n, [&](std::size_t w) {
      const std::size_t idx = indices[start + w];
      detail::zero(buffers[w]);
      const auto tr = model.forward(data.samples[idx]);
      const auto y = data.labels[idx];
      bool c = false;
      nll[w] = negative_log_likelihood(tr.probs, y, &c);
      clamped[w] = c;
      const auto p = tr.probs.values();
      hit[w] = static_cast<std::uint32_t>(std::max_element(p.begin(), p.end()) - p.begin()) == y;
      model.backward(data.samples[idx], tr, cross_entropy_logit_grad(tr.probs, y), buffers[w]);
    });
    for (std::size_t w = 0; w < n; ++w) {
      detail::add_into(grads, buffers[w]);
      out.value.data += nll[w];
      out.value.clamped += clamped[w];
      out.correct += hit[w];
    }
  }
  return out;
}

/// Full objective (summed data term plus penalties) over the selected samples.
inline ObjectiveValue batch_objective(const StrnnModel& model, const Dataset& data,
                                      std::span<const std::size_t> indices) {
  std::vector<double> nll(indices.size());
  std::vector<char> clamped(indices.size());
  parallel_for(indices.size(), [&](std::size_t i) {
    const auto tr = model.forward(data.samples[indices[i]]);
    bool c = false;
    nll[i] = negative_log_likelihood(tr.probs, data.labels[indices[i]], &c);
    clamped[i] = c;
  });
  ObjectiveValue v;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    v.data += nll[i];
    v.clamped += clamped[i];
  }
  v.penalty = model.penalty();
  return v;
}

inline double global_norm(const StrnnParams& g) {
  double sq = 0.0;
  StrnnParams::visit(g, [&](const std::string&, const auto& t) {
    for (double v : t.values()) sq += v * v;
  });
  return std::sqrt(sq);
}

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Minibatch SGD with momentum on the summed cross entropy plus L1
/// penalties. Each batch adds the penalty gradient scaled by batch/N so an
/// epoch applies it once in total.
inline std::vector<EpochMetrics> train(StrnnModel& model, const Dataset& data, const TrainConfig& cfg,
                                       const EpochCallback& on_epoch = {}) {
  cfg.validate();
  detail::check_dataset(model, data);
  std::vector<EpochMetrics> history;
  if (cfg.epochs == 0 || data.size() == 0) return history;

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  StrnnParams velocity = StrnnParams::zeros(model.config());
  StrnnParams grads = StrnnParams::zeros(model.config());
  const double n = static_cast<double>(data.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    EpochMetrics m;
    m.epoch = epoch;
    std::size_t correct = 0;

    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, len);
      detail::zero(grads);
      const auto r = batch_gradient(model, data, idx, grads);
      if (!std::isfinite(r.value.data))
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch));
      model.add_penalty_gradient(grads, static_cast<double>(len) / n);
      m.data_loss += r.value.data;
      m.clamped += r.value.clamped;
      correct += r.correct;

      double scale = 1.0;
      if (cfg.grad_clip) {
        const double norm = global_norm(grads);
        if (!std::isfinite(norm))
          throw NumericError("training diverged: non-finite gradient at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch));
        if (norm > *cfg.grad_clip) scale = *cfg.grad_clip / norm;
      }

      std::vector<std::span<double>> vel;
      StrnnParams::visit(velocity, [&](const std::string&, auto& t) { vel.push_back(t.values()); });
      std::vector<std::span<double>> g;
      StrnnParams::visit(grads, [&](const std::string&, auto& t) { g.push_back(t.values()); });
      std::size_t i = 0;
      StrnnParams::visit(model.params(), [&](const std::string&, auto& t) {
        auto p = t.values();
        auto v = vel[i];
        auto gi = g[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
          v[k] = cfg.momentum * v[k] - cfg.learning_rate * (scale * gi[k]);
          p[k] += v[k];
        }
        ++i;
      });
    }
    m.penalty = model.penalty();
    m.train_accuracy = static_cast<double>(correct) / n;
    if (!std::isfinite(m.penalty))
      throw NumericError("training diverged: non-finite penalty after epoch " + std::to_string(epoch));
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return history;
}

struct TensorCheck {
  std::string name;
  std::size_t entries = 0;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool all_zero = false;  // analytic and numeric gradient both vanish
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double worst() const {
    double w = 0.0;
    for (const auto& t : tensors) w = std::max(w, t.max_relative_error);
    return w;
  }
  bool passed(double tol) const {
    for (const auto& t : tensors)
      if (!(t.max_relative_error < tol)) return false;
    return true;
  }
};

/// Denominator floor of the relative error, so coordinates whose true
/// gradient is ~0 are judged on absolute agreement.
inline constexpr double kGradCheckFloor = 1e-6;

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kGradCheckFloor});
}

/// Compares backpropagated gradients of the full objective against central
/// differences, tensor by tensor.
inline GradCheckReport grad_check(const StrnnModel& model, const Dataset& batch, double step) {
  detail::check_dataset(model, batch);
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});

  StrnnParams analytic = StrnnParams::zeros(model.config());
  batch_gradient(model, batch, idx, analytic);
  model.add_penalty_gradient(analytic, 1.0);

  StrnnModel probe = model;
  const Vector base(model.params().flatten());
  auto objective_at = [&](const Vector& flat) {
    probe.params().assign(flat.values());
    return batch_objective(probe, batch, idx).total();
  };
  const Vector numeric = finite_diff_grad(objective_at, base, step);

  GradCheckReport report;
  std::size_t offset = 0;
  StrnnParams::visit(analytic, [&](const std::string& name, const auto& t) {
    TensorCheck c;
    c.name = name;
    const auto a = t.values();
    c.entries = a.size();
    c.all_zero = true;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double num = numeric[offset + k];
      if (a[k] != 0.0 || std::abs(num) > kGradCheckFloor) c.all_zero = false;
      const double e = relative_error(a[k], num);
      if (k == 0 || e > c.max_relative_error) {
        c.max_relative_error = e;
        c.worst_index = k;
        c.analytic = a[k];
        c.numeric = num;
      }
    }
    offset += a.size();
    report.tensors.push_back(c);
  });
  return report;
}

struct EvalReport {
  std::size_t classes = 0;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::vector<std::size_t> confusion;  // row = true class, column = predicted

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return confusion[truth * classes + predicted]; }
  std::size_t row_total(std::size_t truth) const {
    std::size_t s = 0;
    for (std::size_t c = 0; c < classes; ++c) s += at(truth, c);
    return s;
  }
  double class_accuracy(std::size_t truth) const {
    const auto n = row_total(truth);
    return n ? static_cast<double>(at(truth, truth)) / static_cast<double>(n) : 0.0;
  }
};

inline EvalReport evaluate(const StrnnModel& model, const Dataset& data) {
  detail::check_dataset(model, data);
  EvalReport r;
  r.classes = model.config().classes;
  r.confusion.assign(r.classes * r.classes, 0);
  std::vector<std::uint32_t> pred(data.size());
  parallel_for(data.size(), [&](std::size_t i) { pred[i] = model.predict(data.samples[i]); });
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++r.confusion[data.labels[i] * r.classes + pred[i]];
    r.correct += pred[i] == data.labels[i];
  }
  r.total = data.size();
  return r;
}

struct SaliencyMap {
  GridLayout layout;
  std::vector<double> weights;  // per occupied cell, in [0, 1]

  double at(std::size_t i, std::size_t j) const {
    const auto k = layout.index_of(static_cast<long>(i), static_cast<long>(j));
    return k == GridLayout::npos ? 0.0 : weights[k];
  }
};

/// Per cell: sum of |G^r| over the projected axis, averaged over the four
/// directions, divided by the largest cell value.
inline SaliencyMap saliency(const StrnnModel& model) {
  if (!uses_srnn(model.config().mode)) throw Error("saliency: model has no spatial projections");
  const auto& layout = model.config().layout;
  SaliencyMap map{layout, std::vector<double>(layout.cell_count(), 0.0)};
  for (const auto& d : model.params().srnn.directions)
    for (std::size_t k = 0; k < d.projection.rows(); ++k) {
      double row = 0.0;
      for (std::size_t l = 0; l < d.projection.cols(); ++l) row += std::abs(d.projection(k, l));
      map.weights[k] += row / 4.0;
    }
  const double top = *std::max_element(map.weights.begin(), map.weights.end());
  if (top > 0.0)
    for (auto& w : map.weights) w /= top;
  return map;
}

}  // namespace strnn
