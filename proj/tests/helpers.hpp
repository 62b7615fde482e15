#pragma once

#include <algorithm>
#include <cmath>

#include "strnn/strnn.hpp"

namespace testing_util {

inline strnn::Volume random_volume(const strnn::VolumeDims& d, strnn::Rng& rng,
                                   const strnn::GridLayout* layout = nullptr) {
  strnn::Volume v(d);
  for (std::size_t t = 0; t < d.steps; ++t)
    for (std::size_t i = 0; i < d.height; ++i)
      for (std::size_t j = 0; j < d.width; ++j) {
        if (layout && !layout->occupied(static_cast<long>(i), static_cast<long>(j))) continue;
        for (auto& x : v.at(t, i, j)) x = rng.uniform(-1.0, 1.0);
      }
  return v;
}

inline strnn::Dataset random_dataset(const strnn::ModelConfig& cfg, std::size_t n, std::uint64_t seed) {
  strnn::Rng rng(seed);
  strnn::Dataset d;
  d.dims = cfg.volume_dims();
  for (std::size_t i = 0; i < n; ++i) {
    d.samples.push_back(random_volume(d.dims, rng, &cfg.layout));
    d.labels.push_back(static_cast<std::uint32_t>(i % cfg.classes));
  }
  return d;
}

/// The small configuration used for gradient checks.
inline strnn::ModelConfig tiny_config(strnn::Activation act = strnn::Activation::relu,
                                      strnn::Mode mode = strnn::Mode::strnn) {
  auto kv = strnn::parse_key_values("profile=tiny\n");
  kv["activation"] = strnn::to_string(act);
  kv["mode"] = strnn::to_string(mode);
  return strnn::make_run_config(kv).model;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testing_util
