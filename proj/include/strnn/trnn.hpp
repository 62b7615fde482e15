#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "strnn/numerics.hpp"

namespace strnn {

struct TrnnDims {
  std::size_t input = 0;      // length of m_t
  std::size_t hidden = 0;     // hidden units per chain
  std::size_t steps = 0;      // L
  std::size_t projected = 0;  // L_p
  std::size_t classes = 0;    // C
  bool operator==(const TrnnDims&) const = default;
};

struct TrnnChainParams {
  Matrix input_weights;      // W_ih, hidden x input
  Matrix recurrent_weights;  // W_hh, hidden x hidden
  Vector bias;               // hidden
  Matrix projection;         // G, steps x projected
  Matrix fusion;             // V, classes x (hidden * projected)
};

/// Bidirectional temporal RNN. The backward chain's states and the rows of
/// its projection are indexed by scan step: step 0 reads the last slice.
struct TrnnParams {
  TrnnChainParams forward;
  TrnnChainParams backward;
  Activation activation = Activation::relu;

  static TrnnParams zeros(const TrnnDims& d, Activation act = Activation::relu) {
    TrnnParams p;
    p.activation = act;
    for (auto* c : {&p.forward, &p.backward}) {
      c->input_weights = Matrix(d.hidden, d.input);
      c->recurrent_weights = Matrix(d.hidden, d.hidden);
      c->bias = Vector(d.hidden);
      c->projection = Matrix(d.steps, d.projected);
      c->fusion = Matrix(d.classes, d.hidden * d.projected);
    }
    return p;
  }

  static TrnnParams random(const TrnnDims& d, Activation act, Rng& rng) {
    auto p = zeros(d, act);
    for (auto* c : {&p.forward, &p.backward}) {
      init_uniform_scaled(c->input_weights, rng);
      init_uniform_scaled(c->recurrent_weights, rng);
      init_uniform_scaled(c->projection, rng);
      init_uniform_scaled(c->fusion, rng);
      c->fusion *= kHeadInitScale;  // start near uniform class probabilities
    }
    return p;
  }

  TrnnDims dims() const {
    return {forward.input_weights.cols(), forward.input_weights.rows(), forward.projection.rows(),
            forward.projection.cols(), forward.fusion.rows()};
  }

  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    const char* names[2] = {"trnn.forward.", "trnn.backward."};
    const auto chains = std::array{&self.forward, &self.backward};
    for (int c = 0; c < 2; ++c) {
      const std::string prefix = names[c];
      f(prefix + "W_ih", chains[c]->input_weights);
      f(prefix + "W_hh", chains[c]->recurrent_weights);
      f(prefix + "b", chains[c]->bias);
      f(prefix + "G", chains[c]->projection);
      f(prefix + "V", chains[c]->fusion);
    }
  }
};

struct TrnnTrace {
  std::vector<Vector> forward_hidden;   // by time
  std::vector<Vector> backward_hidden;  // by backward scan step
  Vector forward_projected;             // q^f
  Vector backward_projected;            // q^b
  Vector logits;                        // o
  std::vector<bool> mask;               // by time; false = padding

  std::size_t steps() const noexcept { return forward_hidden.size(); }
};

namespace detail {
inline void check_trnn(const TrnnParams& params, std::span<const Vector> m) {
  const auto d = params.dims();
  if (m.empty()) throw Error("trnn: empty input sequence");
  if (m.size() != d.steps)
    throw ShapeError("trnn: sequence length " + std::to_string(m.size()) + " vs configured L " +
                     std::to_string(d.steps));
  for (const auto* c : {&params.forward, &params.backward}) {
    if (c->input_weights.rows() != d.hidden || c->input_weights.cols() != d.input ||
        c->recurrent_weights.rows() != d.hidden || c->recurrent_weights.cols() != d.hidden ||
        c->bias.size() != d.hidden || c->projection.rows() != d.steps ||
        c->projection.cols() != d.projected || c->fusion.rows() != d.classes ||
        c->fusion.cols() != d.hidden * d.projected)
      throw ShapeError("trnn: inconsistent parameter shapes");
  }
  for (const auto& v : m)
    if (v.size() != d.input)
      throw ShapeError("trnn: input length " + std::to_string(v.size()) + " vs " + std::to_string(d.input));
}

inline void run_chain(const TrnnChainParams& p, Activation act, std::span<const Vector> m, bool reversed,
                      std::vector<Vector>& states) {
  const std::size_t steps = m.size();
  const std::size_t hidden = p.bias.size();
  states.assign(steps, Vector(hidden));
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reversed ? steps - 1 - s : s;
    Vector& h = states[s];
    h = p.bias;
    matvec_add(p.input_weights, m[t].values(), h.values());
    if (s > 0) matvec_add(p.recurrent_weights, states[s - 1].values(), h.values());
    activate_inplace(h.values(), act);
  }
}

inline Vector project_states(const Matrix& g, const std::vector<Vector>& states, const std::vector<bool>& mask,
                             bool reversed) {
  const std::size_t steps = states.size();
  const std::size_t hidden = states.front().size();
  Vector q(hidden * g.cols());
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reversed ? steps - 1 - s : s;
    if (!mask[t]) continue;
    for (std::size_t l = 0; l < g.cols(); ++l) {
      const double w = g(s, l);
      if (w != 0.0) axpy(w, states[s].values(), q.values().subspan(l * hidden, hidden));
    }
  }
  return q;
}
}  // namespace detail

/// Forward and backward chains over m, temporal projections and fused logits.
/// An optional mask (by time) removes padded slices from the projections.
inline TrnnTrace trnn_forward(const TrnnParams& params, std::span<const Vector> m,
                              const std::vector<bool>& mask = {}) {
  detail::check_trnn(params, m);
  TrnnTrace trace;
  trace.mask.assign(m.size(), true);
  if (!mask.empty()) {
    if (mask.size() != m.size()) throw ShapeError("trnn: mask length");
    trace.mask = mask;
  }
  detail::run_chain(params.forward, params.activation, m, false, trace.forward_hidden);
  detail::run_chain(params.backward, params.activation, m, true, trace.backward_hidden);
  trace.forward_projected =
      detail::project_states(params.forward.projection, trace.forward_hidden, trace.mask, false);
  trace.backward_projected =
      detail::project_states(params.backward.projection, trace.backward_hidden, trace.mask, true);
  trace.logits = matvec(params.forward.fusion, trace.forward_projected);
  matvec_add(params.backward.fusion, trace.backward_projected.values(), trace.logits.values());
  return trace;
}

namespace detail {
inline void backprop_chain(const TrnnChainParams& p, TrnnChainParams& g, Activation act,
                           std::span<const Vector> m, const std::vector<Vector>& states,
                           const std::vector<bool>& mask, const Vector& projected, const Vector& grad_o,
                           bool reversed, std::vector<Vector>& grad_m) {
  const std::size_t steps = states.size();
  const std::size_t hidden = p.bias.size();
  const std::size_t proj = p.projection.cols();

  add_outer(g.fusion, grad_o.values(), projected.values());
  Vector grad_q(hidden * proj);
  matvec_transposed_add(p.fusion, grad_o.values(), grad_q.values());

  std::vector<Vector> grad_h(steps, Vector(hidden));
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reversed ? steps - 1 - s : s;
    if (!mask[t]) continue;
    for (std::size_t l = 0; l < proj; ++l) {
      const auto gq = grad_q.values().subspan(l * hidden, hidden);
      g.projection(s, l) += dot(gq, states[s].values());
      const double w = p.projection(s, l);
      if (w != 0.0) axpy(w, gq, grad_h[s].values());
    }
  }

  Vector dz(hidden);
  for (std::size_t s = steps; s-- > 0;) {
    const std::size_t t = reversed ? steps - 1 - s : s;
    for (std::size_t u = 0; u < hidden; ++u)
      dz[u] = grad_h[s][u] * activation_slope_from_output(states[s][u], act);
    add_outer(g.input_weights, dz.values(), m[t].values());
    g.bias += dz;
    matvec_transposed_add(p.input_weights, dz.values(), grad_m[t].values());
    if (s > 0) {
      add_outer(g.recurrent_weights, dz.values(), states[s - 1].values());
      matvec_transposed_add(p.recurrent_weights, dz.values(), grad_h[s - 1].values());
    }
  }
}
}  // namespace detail

/// Accumulates parameter gradients into grads and returns dE/dm_t.
inline std::vector<Vector> trnn_backward(const TrnnParams& params, std::span<const Vector> m,
                                         const TrnnTrace& trace, const Vector& grad_o, TrnnParams& grads) {
  detail::check_trnn(params, m);
  if (trace.steps() != m.size() || trace.backward_hidden.size() != m.size() || trace.mask.size() != m.size())
    throw Error("trnn_backward: trace missing or produced for a different input");
  const auto d = params.dims();
  if (grad_o.size() != d.classes) throw ShapeError("trnn_backward: logit gradient length");

  std::vector<Vector> grad_m(m.size(), Vector(d.input));
  detail::backprop_chain(params.forward, grads.forward, params.activation, m, trace.forward_hidden, trace.mask,
                         trace.forward_projected, grad_o, false, grad_m);
  detail::backprop_chain(params.backward, grads.backward, params.activation, m, trace.backward_hidden,
                         trace.mask, trace.backward_projected, grad_o, true, grad_m);
  return grad_m;
}

/// Pads with zero vectors or truncates to length steps; the returned mask
/// marks the slices that came from the input.
inline std::pair<std::vector<Vector>, std::vector<bool>> fit_length(std::span<const Vector> m, std::size_t steps,
                                                                    std::size_t width) {
  std::vector<Vector> out;
  std::vector<bool> mask(steps, false);
  out.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    if (t < m.size()) {
      if (m[t].size() != width) throw ShapeError("fit_length: vector length");
      out.push_back(m[t]);
      mask[t] = true;
    } else {
      out.emplace_back(width);
    }
  }
  return {std::move(out), std::move(mask)};
}

}  // namespace strnn
