#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace strnn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

/// Dense column vector of doubles.
class Vector {
public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Vector& operator+=(const Vector& o) {
    check_same(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Vector& operator-=(const Vector& o) {
    check_same(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Vector& operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(double s, Vector a) { return a *= s; }

  bool operator==(const Vector&) const = default;

private:
  void check_same(const Vector& o, const char* op) const {
    if (o.size() != size()) {
      std::ostringstream msg;
      msg << "vector " << op << ": length " << size() << " vs " << o.size();
      throw ShapeError(msg.str());
    }
  }

  std::vector<double> data_;
};

/// Row-major dense matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const noexcept {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Matrix& operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  bool operator==(const Matrix&) const = default;

  std::string shape() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {
inline void shape_fail(const char* op, const Matrix& m, std::size_t len) {
  std::ostringstream msg;
  msg << op << ": matrix " << m.shape() << " incompatible with vector of length " << len;
  throw ShapeError(msg.str());
}
}  // namespace detail

/// y = m * v
inline Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) detail::shape_fail("matvec", m, v.size());
  Vector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

/// y += m * v
inline void matvec_add(const Matrix& m, std::span<const double> v, std::span<double> y) {
  if (m.cols() != v.size() || m.rows() != y.size()) detail::shape_fail("matvec_add", m, v.size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    y[r] += acc;
  }
}

/// y += mᵀ * v
inline void matvec_transposed_add(const Matrix& m, std::span<const double> v, std::span<double> y) {
  if (m.rows() != v.size() || m.cols() != y.size()) detail::shape_fail("matvec_transposed_add", m, v.size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) y[c] += row[c] * vr;
  }
}

/// m += a ⊗ b
inline void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b) {
  if (m.rows() != a.size() || m.cols() != b.size()) detail::shape_fail("add_outer", m, b.size());
  auto data = m.values();
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    double* row = data.data() + r * m.cols();
    for (std::size_t c = 0; c < b.size(); ++c) row[c] += ar * b[c];
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw ShapeError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double l1_norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += std::abs(v);
  return acc;
}

enum class Activation { relu, sigmoid };

inline std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "sigmoid"; }

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw Error("unknown activation '" + s + "' (expected relu|sigmoid)");
}

inline double stable_sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double activate(double x, Activation kind) noexcept {
  return kind == Activation::relu ? (x < 0.0 ? 0.0 : x) : stable_sigmoid(x);  // NaN passes through
}

/// Derivative expressed through the activation output; relu'(0) = 0.
inline double activation_slope_from_output(double y, Activation kind) noexcept {
  return kind == Activation::relu ? (y > 0.0 ? 1.0 : 0.0) : y * (1.0 - y);
}

inline Vector activation(const Vector& x, Activation kind) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = activate(x[i], kind);
  return out;
}

inline void activate_inplace(std::span<double> x, Activation kind) noexcept {
  for (auto& v : x) v = activate(v, kind);
}

/// Seeded 64-bit generator. Distributions are computed here rather than via
/// <random> distributions so streams are identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    if (n == 0) throw Error("Rng::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  /// Standard normal via Box-Muller; one value per call.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Scaled uniform init: U[-a, a], a = sqrt(6 / (fan_in + fan_out)).
inline void init_uniform_scaled(Matrix& m, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (auto& v : m.values()) v = rng.uniform(-a, a);
}

/// Extra factor on classifier-head weights so initial logits are small.
inline constexpr double kHeadInitScale = 0.1;

inline bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Central-difference gradient of a scalar function of a parameter vector.
template <class F>
Vector finite_diff_grad(F&& f, const Vector& p, double h) {
  if (!(h > 0.0)) throw Error("finite_diff_grad: step must be positive");
  Vector grad(p.size());
  Vector probe = p;
  for (std::size_t i = 0; i < p.size(); ++i) {
    probe[i] = p[i] + h;
    const double up = f(static_cast<const Vector&>(probe));
    probe[i] = p[i] - h;
    const double down = f(static_cast<const Vector&>(probe));
    probe[i] = p[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("finite_diff_grad: non-finite function value at coordinate " +
                         std::to_string(i));
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace strnn
