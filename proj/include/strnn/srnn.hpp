#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "strnn/numerics.hpp"
#include "strnn/spatial_graph.hpp"
#include "strnn/volume.hpp"

namespace strnn {

struct SrnnDims {
  std::size_t input = 0;      // D, feature length per cell
  std::size_t hidden = 0;     // hidden units per direction
  std::size_t cells = 0;      // K, occupied cells
  std::size_t projected = 0;  // K_p, spatial length after projection
  std::size_t output = 0;     // length of m_t
  bool operator==(const SrnnDims&) const = default;
};

struct SrnnDirectionParams {
  Matrix input_weights;      // U, hidden x input
  Matrix recurrent_weights;  // W, hidden x hidden
  Vector bias;               // b, hidden
  Matrix projection;         // G, cells x projected
  Matrix fusion;             // V, output x (hidden * projected)
};

/// Quad-directional spatial RNN weights; untied across directions.
struct SrnnParams {
  std::array<SrnnDirectionParams, 4> directions;
  Activation activation = Activation::relu;

  static SrnnParams zeros(const SrnnDims& d, Activation act = Activation::relu) {
    SrnnParams p;
    p.activation = act;
    for (auto& dir : p.directions) {
      dir.input_weights = Matrix(d.hidden, d.input);
      dir.recurrent_weights = Matrix(d.hidden, d.hidden);
      dir.bias = Vector(d.hidden);
      dir.projection = Matrix(d.cells, d.projected);
      dir.fusion = Matrix(d.output, d.hidden * d.projected);
    }
    return p;
  }

  static SrnnParams random(const SrnnDims& d, Activation act, Rng& rng) {
    auto p = zeros(d, act);
    for (auto& dir : p.directions) {
      init_uniform_scaled(dir.input_weights, rng);
      // Up to three predecessors feed each cell; scale so their sum starts
      // out no larger than a single Glorot-initialized recurrence.
      init_uniform_scaled(dir.recurrent_weights, rng);
      dir.recurrent_weights *= 1.0 / 3.0;
      init_uniform_scaled(dir.projection, rng);
      init_uniform_scaled(dir.fusion, rng);
    }
    return p;
  }

  SrnnDims dims() const {
    const auto& d = directions[0];
    return {d.input_weights.cols(), d.input_weights.rows(), d.projection.rows(), d.projection.cols(),
            d.fusion.rows()};
  }

  /// Calls f(name, values) for every tensor in a fixed order.
  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    for (std::size_t r = 0; r < 4; ++r) {
      const std::string prefix = std::string("srnn.") + to_string(kDirections[r]) + ".";
      auto& d = self.directions[r];
      f(prefix + "U", d.input_weights);
      f(prefix + "W", d.recurrent_weights);
      f(prefix + "b", d.bias);
      f(prefix + "G", d.projection);
      f(prefix + "V", d.fusion);
    }
  }
};

struct SrnnTrace {
  /// hidden[t][r]: cells x hidden states for slice t, direction r.
  std::vector<std::array<Matrix, 4>> hidden;
  /// projected[t][r]: concatenated projected states s^r_t.
  std::vector<std::array<Vector, 4>> projected;
  /// output[t]: fused m_t.
  std::vector<Vector> output;

  std::size_t steps() const noexcept { return output.size(); }
};

namespace detail {
inline void check_srnn_inputs(const SrnnParams& params, const GridLayout& layout,
                              const std::array<TraversalPlan, 4>& plans, const Volume& volume) {
  const auto d = params.dims();
  const auto& vd = volume.dims();
  if (vd.height != layout.height() || vd.width != layout.width())
    throw ShapeError("srnn: volume grid " + std::to_string(vd.height) + "x" + std::to_string(vd.width) +
                     " does not match layout " + std::to_string(layout.height()) + "x" +
                     std::to_string(layout.width()));
  if (vd.depth != d.input)
    throw ShapeError("srnn: volume depth " + std::to_string(vd.depth) + " vs input size " +
                     std::to_string(d.input));
  if (d.cells != layout.cell_count())
    throw ShapeError("srnn: projection rows " + std::to_string(d.cells) + " vs occupied cells " +
                     std::to_string(layout.cell_count()));
  for (std::size_t r = 0; r < 4; ++r) {
    if (plans[r].direction != kDirections[r] || plans[r].order.size() != d.cells)
      throw ShapeError("srnn: traversal plans do not match the layout");
  }
  for (const auto& dir : params.directions) {
    if (dir.input_weights.rows() != d.hidden || dir.input_weights.cols() != d.input ||
        dir.recurrent_weights.rows() != d.hidden || dir.recurrent_weights.cols() != d.hidden ||
        dir.bias.size() != d.hidden || dir.projection.rows() != d.cells ||
        dir.projection.cols() != d.projected || dir.fusion.rows() != d.output ||
        dir.fusion.cols() != d.hidden * d.projected)
      throw ShapeError("srnn: inconsistent parameter shapes across directions");
  }
}
}  // namespace detail

/// Scans every slice in the four directions, projects each direction's hidden
/// states over the cell axis and sums the fused projections into m_t.
inline SrnnTrace srnn_forward(const SrnnParams& params, const GridLayout& layout,
                              const std::array<TraversalPlan, 4>& plans, const Volume& volume) {
  detail::check_srnn_inputs(params, layout, plans, volume);
  const auto d = params.dims();
  const auto& cells = layout.cells();
  const std::size_t steps = volume.dims().steps;

  SrnnTrace trace;
  trace.hidden.resize(steps);
  trace.projected.resize(steps);
  trace.output.assign(steps, Vector(d.output));

  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < 4; ++r) {
      const auto& p = params.directions[r];
      Matrix& h = trace.hidden[t][r];
      h = Matrix(d.cells, d.hidden);
      auto hv = h.values();
      for (std::size_t k : plans[r].order) {
        std::span<double> hk = hv.subspan(k * d.hidden, d.hidden);
        std::copy(p.bias.values().begin(), p.bias.values().end(), hk.begin());
        matvec_add(p.input_weights, volume.at(t, cells[k].row, cells[k].col), hk);
        for (std::size_t pred : plans[r].predecessors[k])
          matvec_add(p.recurrent_weights, h.row(pred), hk);
        activate_inplace(hk, params.activation);
      }

      Vector& s = trace.projected[t][r];
      s = Vector(d.hidden * d.projected);
      auto sv = s.values();
      for (std::size_t k = 0; k < d.cells; ++k)
        for (std::size_t l = 0; l < d.projected; ++l) {
          const double g = p.projection(k, l);
          if (g != 0.0) axpy(g, h.row(k), sv.subspan(l * d.hidden, d.hidden));
        }
    }
    // Fusion is reduced in the fixed direction order.
    for (std::size_t r = 0; r < 4; ++r)
      matvec_add(params.directions[r].fusion, trace.projected[t][r].values(), trace.output[t].values());
  }
  return trace;
}

/// Accumulates dE/dparams into grads given dE/dm_t for every slice.
inline void srnn_backward(const SrnnParams& params, const GridLayout& layout,
                          const std::array<TraversalPlan, 4>& plans, const Volume& volume,
                          const SrnnTrace& trace, std::span<const Vector> grad_m, SrnnParams& grads) {
  detail::check_srnn_inputs(params, layout, plans, volume);
  const auto d = params.dims();
  const std::size_t steps = volume.dims().steps;
  if (trace.steps() != steps || trace.hidden.size() != steps)
    throw Error("srnn_backward: trace missing or produced for a different input");
  if (grad_m.size() != steps) throw ShapeError("srnn_backward: one output gradient per slice required");
  const auto& cells = layout.cells();

  Vector grad_s(d.hidden * d.projected);
  Matrix grad_h(d.cells, d.hidden);
  Vector dz(d.hidden);

  for (std::size_t t = 0; t < steps; ++t) {
    if (grad_m[t].size() != d.output) throw ShapeError("srnn_backward: output gradient length");
    for (std::size_t r = 0; r < 4; ++r) {
      const auto& p = params.directions[r];
      auto& g = grads.directions[r];
      const Matrix& h = trace.hidden[t][r];
      const Vector& s = trace.projected[t][r];

      add_outer(g.fusion, grad_m[t].values(), s.values());
      grad_s.fill(0.0);
      matvec_transposed_add(p.fusion, grad_m[t].values(), grad_s.values());

      grad_h.fill(0.0);
      auto ghv = grad_h.values();
      for (std::size_t k = 0; k < d.cells; ++k)
        for (std::size_t l = 0; l < d.projected; ++l) {
          const auto gs_l = grad_s.values().subspan(l * d.hidden, d.hidden);
          g.projection(k, l) += dot(gs_l, h.row(k));
          const double w = p.projection(k, l);
          if (w != 0.0) axpy(w, gs_l, ghv.subspan(k * d.hidden, d.hidden));
        }

      const auto& order = plans[r].order;
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t k = *it;
        const auto hk = h.row(k);
        for (std::size_t u = 0; u < d.hidden; ++u)
          dz[u] = ghv[k * d.hidden + u] * activation_slope_from_output(hk[u], params.activation);
        add_outer(g.input_weights, dz.values(), volume.at(t, cells[k].row, cells[k].col));
        g.bias += dz;
        for (std::size_t pred : plans[r].predecessors[k]) {
          add_outer(g.recurrent_weights, dz.values(), h.row(pred));
          matvec_transposed_add(p.recurrent_weights, dz.values(), ghv.subspan(pred * d.hidden, d.hidden));
        }
      }
    }
  }
}

}  // namespace strnn
