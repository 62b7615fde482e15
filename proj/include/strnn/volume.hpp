#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "strnn/numerics.hpp"

namespace strnn {

struct VolumeDims {
  std::size_t steps = 0;   // T
  std::size_t height = 0;  // H
  std::size_t width = 0;   // W
  std::size_t depth = 0;   // D
  std::size_t count() const noexcept { return steps * height * width * depth; }
  bool operator==(const VolumeDims&) const = default;
  std::string str() const {
    return std::to_string(steps) + "x" + std::to_string(height) + "x" + std::to_string(width) + "x" +
           std::to_string(depth);
  }
};

/// T x H x W grid of D-dimensional vectors, stored t-major then row, column, feature.
class Volume {
public:
  Volume() = default;
  explicit Volume(VolumeDims dims, double fill = 0.0) : dims_(dims), data_(dims.count(), fill) {}
  Volume(VolumeDims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims_.count()) throw ShapeError("volume: data size does not match " + dims_.str());
  }

  const VolumeDims& dims() const noexcept { return dims_; }

  std::span<const double> at(std::size_t t, std::size_t i, std::size_t j) const noexcept {
    return std::span<const double>(data_).subspan(offset(t, i, j), dims_.depth);
  }
  std::span<double> at(std::size_t t, std::size_t i, std::size_t j) noexcept {
    return std::span<double>(data_).subspan(offset(t, i, j), dims_.depth);
  }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  bool operator==(const Volume&) const = default;

private:
  std::size_t offset(std::size_t t, std::size_t i, std::size_t j) const noexcept {
    return ((t * dims_.height + i) * dims_.width + j) * dims_.depth;
  }

  VolumeDims dims_;
  std::vector<double> data_;
};

/// Samples sharing one shape; labels are zero-based and may be absent.
struct Dataset {
  VolumeDims dims;
  std::vector<Volume> samples;
  std::vector<std::uint32_t> labels;

  std::size_t size() const noexcept { return samples.size(); }
  bool labeled() const noexcept { return !samples.empty() && labels.size() == samples.size(); }
};

}  // namespace strnn
