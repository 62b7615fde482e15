#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "strnn/loss.hpp"
#include "strnn/numerics.hpp"
#include "strnn/spatial_graph.hpp"
#include "strnn/srnn.hpp"
#include "strnn/trnn.hpp"
#include "strnn/volume.hpp"

namespace strnn {

/// strnn: spatial RNN feeding the temporal RNN.
/// srnn_only: spatial RNN, slices averaged over time, dense classifier.
/// trnn_only: dense map of each flattened slice feeding the temporal RNN.
/// non_sparse: strnn with both L1 weights forced to zero.
enum class Mode { strnn, srnn_only, trnn_only, non_sparse };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::strnn: return "strnn";
    case Mode::srnn_only: return "srnn_only";
    case Mode::trnn_only: return "trnn_only";
    case Mode::non_sparse: return "non_sparse";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "strnn") return Mode::strnn;
  if (s == "srnn_only") return Mode::srnn_only;
  if (s == "trnn_only") return Mode::trnn_only;
  if (s == "non_sparse") return Mode::non_sparse;
  throw Error("unknown mode '" + s + "' (expected strnn|srnn_only|trnn_only|non_sparse)");
}

inline bool uses_srnn(Mode m) { return m != Mode::trnn_only; }
inline bool uses_trnn(Mode m) { return m != Mode::srnn_only; }

struct ModelConfig {
  Mode mode = Mode::strnn;
  GridLayout layout = GridLayout::full(1, 1);
  std::size_t input_dim = 5;
  std::size_t srnn_hidden = 30;
  std::size_t srnn_output = 30;
  std::size_t spatial_projected = 10;  // K_p
  std::size_t trnn_hidden = 30;
  std::size_t steps = 9;               // L
  std::size_t temporal_projected = 5;  // L_p
  std::size_t classes = 3;
  Activation activation = Activation::relu;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  SrnnDims srnn_dims() const {
    return {input_dim, srnn_hidden, layout.cell_count(), spatial_projected, srnn_output};
  }
  TrnnDims trnn_dims() const { return {srnn_output, trnn_hidden, steps, temporal_projected, classes}; }

  LossConfig loss() const {
    LossConfig cfg;
    cfg.class_count = classes;
    if (mode != Mode::non_sparse) {
      cfg.lambda1 = uses_srnn(mode) ? lambda1 : 0.0;
      cfg.lambda2 = uses_trnn(mode) ? lambda2 : 0.0;
    }
    return cfg;
  }

  VolumeDims volume_dims() const { return {steps, layout.height(), layout.width(), input_dim}; }

  void validate() const {
    if (input_dim == 0 || srnn_hidden == 0 || srnn_output == 0 || spatial_projected == 0 || trnn_hidden == 0 ||
        steps == 0 || temporal_projected == 0)
      throw Error("model config: every dimension must be positive");
    if (classes < 2) throw Error("model config: at least two classes required");
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw Error("model config: L1 weights must be nonnegative");
  }
};

/// Dense layer y = W x + b, used by the ablation modes.
struct Dense {
  Matrix weights;
  Vector bias;
};

/// Every learnable tensor of a model. Only the parts used by the mode are
/// allocated; visit() skips the rest.
struct StrnnParams {
  Mode mode = Mode::strnn;
  SrnnParams srnn;
  TrnnParams trnn;
  Dense slice_dense;  // trnn_only
  Dense time_dense;   // srnn_only

  static StrnnParams zeros(const ModelConfig& cfg) {
    StrnnParams p;
    p.mode = cfg.mode;
    if (uses_srnn(cfg.mode)) p.srnn = SrnnParams::zeros(cfg.srnn_dims(), cfg.activation);
    if (uses_trnn(cfg.mode)) p.trnn = TrnnParams::zeros(cfg.trnn_dims(), cfg.activation);
    if (cfg.mode == Mode::trnn_only) {
      p.slice_dense.weights = Matrix(cfg.srnn_output, cfg.layout.cell_count() * cfg.input_dim);
      p.slice_dense.bias = Vector(cfg.srnn_output);
    }
    if (cfg.mode == Mode::srnn_only) {
      p.time_dense.weights = Matrix(cfg.classes, cfg.srnn_output);
      p.time_dense.bias = Vector(cfg.classes);
    }
    return p;
  }

  static StrnnParams random(const ModelConfig& cfg, Rng& rng) {
    StrnnParams p;
    p.mode = cfg.mode;
    if (uses_srnn(cfg.mode)) p.srnn = SrnnParams::random(cfg.srnn_dims(), cfg.activation, rng);
    if (uses_trnn(cfg.mode)) p.trnn = TrnnParams::random(cfg.trnn_dims(), cfg.activation, rng);
    if (cfg.mode == Mode::trnn_only) {
      p.slice_dense.weights = Matrix(cfg.srnn_output, cfg.layout.cell_count() * cfg.input_dim);
      p.slice_dense.bias = Vector(cfg.srnn_output);
      init_uniform_scaled(p.slice_dense.weights, rng);
    }
    if (cfg.mode == Mode::srnn_only) {
      p.time_dense.weights = Matrix(cfg.classes, cfg.srnn_output);
      p.time_dense.bias = Vector(cfg.classes);
      init_uniform_scaled(p.time_dense.weights, rng);
      p.time_dense.weights *= kHeadInitScale;
    }
    return p;
  }

  /// f(name, tensor) over every allocated tensor, in a fixed order.
  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    if (uses_srnn(self.mode)) SrnnParams::visit(self.srnn, f);
    if (self.mode == Mode::trnn_only) {
      f(std::string("slice_dense.W"), self.slice_dense.weights);
      f(std::string("slice_dense.b"), self.slice_dense.bias);
    }
    if (uses_trnn(self.mode)) TrnnParams::visit(self.trnn, f);
    if (self.mode == Mode::srnn_only) {
      f(std::string("time_dense.W"), self.time_dense.weights);
      f(std::string("time_dense.b"), self.time_dense.bias);
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit(*this, [&](const std::string&, const auto& t) { n += t.values().size(); });
    return n;
  }

  /// All values flattened in visit order.
  std::vector<double> flatten() const {
    std::vector<double> out;
    visit(*this, [&](const std::string&, const auto& t) {
      out.insert(out.end(), t.values().begin(), t.values().end());
    });
    return out;
  }

  void assign(std::span<const double> flat) {
    std::size_t pos = 0;
    visit(*this, [&](const std::string&, auto& t) {
      auto v = t.values();
      if (pos + v.size() > flat.size()) throw ShapeError("assign: flat parameter vector too short");
      std::copy(flat.begin() + pos, flat.begin() + pos + v.size(), v.begin());
      pos += v.size();
    });
    if (pos != flat.size()) throw ShapeError("assign: flat parameter vector too long");
  }
};

struct SampleTrace {
  SrnnTrace srnn;
  std::vector<Vector> slices;  // m_t
  TrnnTrace trnn;
  Vector logits;
  Vector probs;
};

/// Configured network: parameters plus the traversal plans of its layout.
class StrnnModel {
public:
  StrnnModel(ModelConfig cfg, StrnnParams params)
      : cfg_(std::move(cfg)), params_(std::move(params)), plans_(build_plans(cfg_.layout)) {
    cfg_.validate();
    if (params_.mode != cfg_.mode) throw Error("model: parameter set built for a different mode");
    check_shapes();
  }

  static StrnnModel random(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    return StrnnModel(cfg, StrnnParams::random(cfg, rng));
  }

  const ModelConfig& config() const noexcept { return cfg_; }
  const StrnnParams& params() const noexcept { return params_; }
  StrnnParams& params() noexcept { return params_; }
  const std::array<TraversalPlan, 4>& plans() const noexcept { return plans_; }

  void check_volume(const Volume& v) const {
    if (v.dims() != cfg_.volume_dims())
      throw ShapeError("model: volume " + v.dims().str() + " does not match model input " +
                       cfg_.volume_dims().str());
  }

  SampleTrace forward(const Volume& x) const {
    check_volume(x);
    SampleTrace tr;
    if (uses_srnn(cfg_.mode)) {
      tr.srnn = srnn_forward(params_.srnn, cfg_.layout, plans_, x);
      tr.slices = tr.srnn.output;
    } else {
      tr.slices.reserve(cfg_.steps);
      for (std::size_t t = 0; t < cfg_.steps; ++t) {
        Vector m = params_.slice_dense.bias;
        matvec_add(params_.slice_dense.weights, flatten_slice(x, t).values(), m.values());
        tr.slices.push_back(std::move(m));
      }
    }
    if (uses_trnn(cfg_.mode)) {
      tr.trnn = trnn_forward(params_.trnn, tr.slices);
      tr.logits = tr.trnn.logits;
    } else {
      tr.logits = params_.time_dense.bias;
      matvec_add(params_.time_dense.weights, time_mean(tr.slices).values(), tr.logits.values());
    }
    tr.probs = softmax(tr.logits);
    return tr;
  }

  /// Accumulates data-term gradients for one sample given dE/do.
  void backward(const Volume& x, const SampleTrace& tr, const Vector& grad_logits, StrnnParams& grads) const {
    check_volume(x);
    if (grads.mode != cfg_.mode) throw Error("model: gradient buffer built for a different mode");
    if (tr.slices.size() != cfg_.steps) throw Error("model backward: trace missing");
    std::vector<Vector> grad_m;
    if (uses_trnn(cfg_.mode)) {
      grad_m = trnn_backward(params_.trnn, tr.slices, tr.trnn, grad_logits, grads.trnn);
    } else {
      add_outer(grads.time_dense.weights, grad_logits.values(), time_mean(tr.slices).values());
      grads.time_dense.bias += grad_logits;
      Vector g(cfg_.srnn_output);
      matvec_transposed_add(params_.time_dense.weights, grad_logits.values(), g.values());
      g *= 1.0 / static_cast<double>(cfg_.steps);
      grad_m.assign(cfg_.steps, g);
    }
    if (uses_srnn(cfg_.mode)) {
      srnn_backward(params_.srnn, cfg_.layout, plans_, x, tr.srnn, grad_m, grads.srnn);
    } else {
      for (std::size_t t = 0; t < cfg_.steps; ++t) {
        add_outer(grads.slice_dense.weights, grad_m[t].values(), flatten_slice(x, t).values());
        grads.slice_dense.bias += grad_m[t];
      }
    }
  }

  ProjectionSet projections() const { return projections_of(params_); }

  ProjectionSet projections_of(const StrnnParams& p) const {
    ProjectionSet set;
    if (uses_srnn(cfg_.mode))
      for (const auto& d : p.srnn.directions) set.spatial.push_back(&d.projection);
    if (uses_trnn(cfg_.mode)) {
      set.temporal.push_back(&p.trnn.forward.projection);
      set.temporal.push_back(&p.trnn.backward.projection);
    }
    return set;
  }

  double penalty() const { return projection_penalty(projections(), cfg_.loss()); }

  /// grads += scale * d(penalty)/d(params)
  void add_penalty_gradient(StrnnParams& grads, double scale) const {
    const auto loss = cfg_.loss();
    if (uses_srnn(cfg_.mode) && loss.lambda1 != 0.0)
      for (std::size_t r = 0; r < 4; ++r)
        add_l1_subgradient(params_.srnn.directions[r].projection, scale * loss.lambda1,
                           grads.srnn.directions[r].projection);
    if (uses_trnn(cfg_.mode) && loss.lambda2 != 0.0) {
      add_l1_subgradient(params_.trnn.forward.projection, scale * loss.lambda2, grads.trnn.forward.projection);
      add_l1_subgradient(params_.trnn.backward.projection, scale * loss.lambda2, grads.trnn.backward.projection);
    }
  }

  std::uint32_t predict(const Volume& x) const {
    const auto tr = forward(x);
    const auto p = tr.probs.values();
    return static_cast<std::uint32_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }

private:
  Vector flatten_slice(const Volume& x, std::size_t t) const {
    Vector flat(cfg_.layout.cell_count() * cfg_.input_dim);
    std::size_t pos = 0;
    for (const auto& c : cfg_.layout.cells())
      for (double v : x.at(t, c.row, c.col)) flat[pos++] = v;
    return flat;
  }

  static Vector time_mean(const std::vector<Vector>& slices) {
    Vector mean(slices.front().size());
    for (const auto& m : slices) mean += m;
    mean *= 1.0 / static_cast<double>(slices.size());
    return mean;
  }

  void check_shapes() const {
    auto expected = StrnnParams::zeros(cfg_);
    std::vector<std::pair<std::string, std::size_t>> want, have;
    StrnnParams::visit(expected, [&](const std::string& n, const auto& t) { want.emplace_back(n, t.values().size()); });
    StrnnParams::visit(params_, [&](const std::string& n, const auto& t) { have.emplace_back(n, t.values().size()); });
    if (want != have) throw ShapeError("model: parameter shapes do not match configuration");
  }

  ModelConfig cfg_;
  StrnnParams params_;
  std::array<TraversalPlan, 4> plans_;
};

}  // namespace strnn
