#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "strnn/numerics.hpp"

namespace strnn {

/// Zero-based grid coordinate (row, column).
struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const Cell&) const = default;
};

/// Rectangular grid with an occupancy mask. Occupied cells are numbered
/// 0..K-1 in raster order; that number is the cell's index everywhere in the
/// library (hidden-state rows, projection rows, volume channels).
class GridLayout {
public:
  GridLayout() = default;

  GridLayout(std::size_t height, std::size_t width, std::vector<bool> occupancy)
      : height_(height), width_(width), occupied_(std::move(occupancy)) {
    if (height_ == 0 || width_ == 0) throw Error("grid layout: zero extent");
    if (occupied_.size() != height_ * width_) throw ShapeError("grid layout: mask size mismatch");
    index_.assign(height_ * width_, npos);
    for (std::size_t i = 0; i < height_; ++i)
      for (std::size_t j = 0; j < width_; ++j)
        if (occupied_[i * width_ + j]) {
          index_[i * width_ + j] = cells_.size();
          cells_.push_back({i, j});
        }
    if (cells_.empty()) throw Error("grid layout: no occupied cells");
  }

  static GridLayout full(std::size_t height, std::size_t width) {
    return GridLayout(height, width, std::vector<bool>(height * width, true));
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t cell_count() const noexcept { return cells_.size(); }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<bool>& occupancy() const noexcept { return occupied_; }

  bool occupied(long i, long j) const noexcept {
    if (i < 0 || j < 0 || i >= static_cast<long>(height_) || j >= static_cast<long>(width_)) return false;
    return occupied_[static_cast<std::size_t>(i) * width_ + static_cast<std::size_t>(j)];
  }

  /// Index of an occupied cell, npos for an empty or out-of-range one.
  std::size_t index_of(long i, long j) const noexcept {
    if (!occupied(i, j)) return npos;
    return index_[static_cast<std::size_t>(i) * width_ + static_cast<std::size_t>(j)];
  }

  bool operator==(const GridLayout& o) const {
    return height_ == o.height_ && width_ == o.width_ && occupied_ == o.occupied_;
  }

private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<bool> occupied_;
  std::vector<std::size_t> index_;
  std::vector<Cell> cells_;
};

enum class Direction { TopLeft, TopRight, BottomLeft, BottomRight };

inline constexpr std::array<Direction, 4> kDirections = {
    Direction::TopLeft, Direction::TopRight, Direction::BottomLeft, Direction::BottomRight};

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::TopLeft: return "top_left";
    case Direction::TopRight: return "top_right";
    case Direction::BottomLeft: return "bottom_left";
    case Direction::BottomRight: return "bottom_right";
  }
  return "?";
}

/// Visit order plus predecessor DAG for one scan direction.
struct TraversalPlan {
  Direction direction = Direction::TopLeft;
  /// Cell indices in visit order.
  std::vector<std::size_t> order;
  /// predecessors[k]: indices of the already-visited occupied neighbours of cell k.
  std::vector<std::vector<std::size_t>> predecessors;
};

namespace detail {
// Row/column step for a scan that starts at the given corner.
inline std::pair<int, int> scan_steps(Direction d) {
  switch (d) {
    case Direction::TopLeft: return {1, 1};
    case Direction::TopRight: return {1, -1};
    case Direction::BottomLeft: return {-1, 1};
    case Direction::BottomRight: return {-1, -1};
  }
  return {1, 1};
}
}  // namespace detail

/// Top-left rule: raster order, predecessors {(i,j-1), (i-1,j-1), (i-1,j)}.
/// The other corners mirror rows and/or columns.
inline TraversalPlan build_plan(const GridLayout& layout, Direction d) {
  if (layout.cell_count() == 0) throw Error("build_plan: empty layout");
  const auto [di, dj] = detail::scan_steps(d);
  const long h = static_cast<long>(layout.height());
  const long w = static_cast<long>(layout.width());

  TraversalPlan plan;
  plan.direction = d;
  plan.order.reserve(layout.cell_count());
  plan.predecessors.resize(layout.cell_count());

  for (long step_i = 0; step_i < h; ++step_i) {
    const long i = di > 0 ? step_i : h - 1 - step_i;
    for (long step_j = 0; step_j < w; ++step_j) {
      const long j = dj > 0 ? step_j : w - 1 - step_j;
      const std::size_t k = layout.index_of(i, j);
      if (k == GridLayout::npos) continue;
      plan.order.push_back(k);
      auto& preds = plan.predecessors[k];
      for (const auto [oi, oj] : {std::pair{0L, -1L}, {-1L, -1L}, {-1L, 0L}}) {
        const std::size_t p = layout.index_of(i + oi * di, j + oj * dj);
        if (p != GridLayout::npos) preds.push_back(p);
      }
    }
  }
  return plan;
}

inline std::array<TraversalPlan, 4> build_plans(const GridLayout& layout) {
  return {build_plan(layout, Direction::TopLeft), build_plan(layout, Direction::TopRight),
          build_plan(layout, Direction::BottomLeft), build_plan(layout, Direction::BottomRight)};
}

/// Parses the text layout format: "h w" then h rows of w characters,
/// '#' occupied and '.' empty.
inline GridLayout parse_layout(std::istream& in) {
  std::size_t h = 0, w = 0;
  if (!(in >> h >> w) || h == 0 || w == 0) throw Error("layout: bad header, expected \"h w\"");
  std::string line;
  std::getline(in, line);
  std::vector<bool> mask;
  mask.reserve(h * w);
  for (std::size_t i = 0; i < h; ++i) {
    if (!std::getline(in, line)) throw Error("layout: expected " + std::to_string(h) + " rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() != w)
      throw Error("layout: row " + std::to_string(i + 1) + " has " + std::to_string(line.size()) +
                  " characters, expected " + std::to_string(w));
    for (char c : line) {
      if (c != '#' && c != '.') throw Error(std::string("layout: unexpected character '") + c + "'");
      mask.push_back(c == '#');
    }
  }
  return GridLayout(h, w, std::move(mask));
}

inline GridLayout parse_layout(const std::string& text) {
  std::istringstream in(text);
  return parse_layout(in);
}

inline void write_layout(std::ostream& out, const GridLayout& layout) {
  out << layout.height() << ' ' << layout.width() << '\n';
  for (std::size_t i = 0; i < layout.height(); ++i) {
    for (std::size_t j = 0; j < layout.width(); ++j)
      out << (layout.occupied(static_cast<long>(i), static_cast<long>(j)) ? '#' : '.');
    out << '\n';
  }
}

inline std::string format_layout(const GridLayout& layout) {
  std::ostringstream out;
  write_layout(out, layout);
  return out.str();
}

}  // namespace strnn
