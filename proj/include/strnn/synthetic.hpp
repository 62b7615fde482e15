#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "strnn/numerics.hpp"
#include "strnn/spatial_graph.hpp"
#include "strnn/volume.hpp"

namespace strnn {

struct SyntheticSpec {
  std::size_t classes = 3;
  std::size_t height = 4;
  std::size_t width = 4;
  std::size_t steps = 9;
  std::size_t depth = 5;
  std::size_t count = 30;
  std::size_t active_cells = 0;  // cells per spatial template; 0 = max(2, K/8)
  bool jitter = true;            // random placement of the template per sample
  double spatial_signal = 1.0;
  double temporal_signal = 1.0;
  double noise_sigma = 0.5;
  // Fraction of samples that carry only one of the two cues (half of them
  // spatial only, half temporal only); the rest carry both.
  double single_cue_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Class c is defined by (a) a spatial shape: a few cells at class-specific
/// relative offsets, all carrying one shared feature pattern, and (b) a
/// temporal pulse at a class-specific position carried by a second shared
/// pattern on every cell. Classes differ spatially only in the arrangement
/// of their active cells; with jitter the shape is placed at a random grid
/// position per sample. Pulses have equal shape, so a model that averages
/// over time cannot tell them apart. Gaussian noise on every entry.
struct SyntheticFamily {
  using Offset = std::pair<long, long>;

  SyntheticSpec spec;
  GridLayout layout;
  std::vector<std::vector<Offset>> shapes;     // per class, normalized to min row/col 0
  std::vector<double> active_pattern;          // length D
  std::vector<std::vector<double>> envelopes;  // per class, length T
  std::vector<double> carrier;                 // per cell and feature, length K*D

  explicit SyntheticFamily(const SyntheticSpec& s) : spec(s), layout(GridLayout::full(s.height, s.width)) {
    if (s.classes < 2) throw Error("synthetic: at least two classes required");
    if (s.steps == 0 || s.depth == 0) throw Error("synthetic: steps and depth must be positive");
    if (!(s.single_cue_fraction >= 0.0 && s.single_cue_fraction <= 1.0))
      throw Error("synthetic: single_cue_fraction must lie in [0, 1]");
    Rng rng(s.seed);
    const std::size_t k = layout.cell_count();
    const std::size_t active = s.active_cells ? std::min(s.active_cells, k) : std::max<std::size_t>(2, k / 8);
    const long box_h = static_cast<long>(std::min<std::size_t>(s.height, 3));
    const long box_w = static_cast<long>(std::min<std::size_t>(s.width, 3));
    if (static_cast<std::size_t>(box_h * box_w) < active) throw Error("synthetic: grid too small for template");

    // Distinct shapes up to translation, drawn inside a 3x3 box.
    std::vector<Offset> box;
    for (long i = 0; i < box_h; ++i)
      for (long j = 0; j < box_w; ++j) box.emplace_back(i, j);
    for (std::size_t attempts = 0; shapes.size() < s.classes; ++attempts) {
      if (attempts > 10000) throw Error("synthetic: cannot draw distinct spatial templates");
      rng.shuffle(box);
      std::vector<Offset> shape(box.begin(), box.begin() + static_cast<long>(active));
      normalize(shape);
      if (std::find(shapes.begin(), shapes.end(), shape) == shapes.end()) shapes.push_back(shape);
    }

    active_pattern.resize(s.depth);
    for (auto& v : active_pattern) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
    carrier.resize(k * s.depth);
    for (auto& v : carrier) v = rng.uniform() < 0.5 ? -1.0 : 1.0;

    const double width = std::max(0.75, static_cast<double>(s.steps) / (2.0 * static_cast<double>(s.classes)));
    for (std::size_t c = 0; c < s.classes; ++c) {
      const double centre = (static_cast<double>(c) + 0.5) * static_cast<double>(s.steps) /
                                static_cast<double>(s.classes) - 0.5;
      std::vector<double> env(s.steps);
      for (std::size_t t = 0; t < s.steps; ++t) {
        const double z = (static_cast<double>(t) - centre) / width;
        env[t] = std::exp(-0.5 * z * z);
      }
      envelopes.push_back(std::move(env));
    }
  }

  static void normalize(std::vector<Offset>& shape) {
    long mi = shape.front().first, mj = shape.front().second;
    for (const auto& [i, j] : shape) {
      mi = std::min(mi, i);
      mj = std::min(mj, j);
    }
    for (auto& [i, j] : shape) {
      i -= mi;
      j -= mj;
    }
    std::sort(shape.begin(), shape.end());
  }

  /// Valid top-left anchors for a class shape.
  std::vector<Cell> placements(std::size_t c) const {
    long h = 0, w = 0;
    for (const auto& [i, j] : shapes[c]) {
      h = std::max(h, i + 1);
      w = std::max(w, j + 1);
    }
    std::vector<Cell> out;
    for (long i = 0; i + h <= static_cast<long>(spec.height); ++i)
      for (long j = 0; j + w <= static_cast<long>(spec.width); ++j)
        out.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
    return out;
  }

  enum class Cues { both, spatial, temporal };

  /// Noise-free sample of class c with its shape anchored at `anchor`.
  Volume mean(std::size_t c, Cell anchor, Cues cues = Cues::both) const {
    const double sp = cues == Cues::temporal ? 0.0 : spec.spatial_signal;
    const double tp = cues == Cues::spatial ? 0.0 : spec.temporal_signal;
    Volume v({spec.steps, spec.height, spec.width, spec.depth});
    for (std::size_t t = 0; t < spec.steps; ++t) {
      for (std::size_t cell = 0; cell < layout.cell_count(); ++cell) {
        const auto& rc = layout.cells()[cell];
        auto x = v.at(t, rc.row, rc.col);
        for (std::size_t d = 0; d < spec.depth; ++d)
          x[d] = tp * envelopes[c][t] * carrier[cell * spec.depth + d];
      }
      for (const auto& [i, j] : shapes[c]) {
        auto x = v.at(t, anchor.row + static_cast<std::size_t>(i), anchor.col + static_cast<std::size_t>(j));
        for (std::size_t d = 0; d < spec.depth; ++d) x[d] += sp * active_pattern[d];
      }
    }
    return v;
  }

  /// Labels cycle through the classes and are then shuffled, so class counts
  /// differ by at most one.
  Dataset generate(std::size_t count, std::uint64_t sample_seed) const {
    Rng rng(sample_seed);
    Dataset data;
    data.dims = {spec.steps, spec.height, spec.width, spec.depth};
    data.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) data.labels[i] = static_cast<std::uint32_t>(i % spec.classes);
    rng.shuffle(data.labels);
    data.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto c = data.labels[i];
      const auto anchors = placements(c);
      const Cell anchor = spec.jitter ? anchors[rng.below(anchors.size())] : anchors.front();
      Cues cues = Cues::both;
      if (spec.single_cue_fraction > 0.0 && rng.uniform() < spec.single_cue_fraction)
        cues = rng.uniform() < 0.5 ? Cues::spatial : Cues::temporal;
      Volume v = mean(c, anchor, cues);
      if (spec.noise_sigma > 0.0)
        for (auto& x : v.values()) x += spec.noise_sigma * rng.normal();
      data.samples.push_back(std::move(v));
    }
    return data;
  }
};

/// Labeled dataset of spec.count samples drawn from the family seeded by spec.seed.
inline Dataset gen_synthetic(const SyntheticSpec& spec) {
  SyntheticFamily family(spec);
  return family.generate(spec.count, spec.seed ^ 0x9e3779b97f4a7c15ULL);
}

}  // namespace strnn
