#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "strnn/numerics.hpp"
#include "strnn/volume.hpp"

namespace strnn {

enum class IoErrorCode { open_failed, bad_magic, truncated, dim_overflow, bad_dims, trailing_bytes, bad_record };

inline const char* to_string(IoErrorCode c) {
  switch (c) {
    case IoErrorCode::open_failed: return "open failed";
    case IoErrorCode::bad_magic: return "bad magic";
    case IoErrorCode::truncated: return "truncated";
    case IoErrorCode::dim_overflow: return "dimension overflow";
    case IoErrorCode::bad_dims: return "bad dimensions";
    case IoErrorCode::trailing_bytes: return "trailing bytes";
    case IoErrorCode::bad_record: return "bad record";
  }
  return "?";
}

class IoError : public Error {
public:
  IoError(IoErrorCode code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
  IoErrorCode code() const noexcept { return code_; }

private:
  IoErrorCode code_;
};

namespace io {

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorCode::open_failed, path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrorCode::open_failed, path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(IoErrorCode::open_failed, "write to " + path);
}

/// Little-endian writer.
class Writer {
public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<unsigned char>& buffer() { return buf_; }

private:
  std::vector<unsigned char> buf_;
};

/// Little-endian reader; every short read is reported as truncation.
class Reader {
public:
  Reader(const std::vector<unsigned char>& data, std::string what) : data_(data), what_(std::move(what)) {}

  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void need(std::size_t n) const {
    if (remaining() < n)
      throw IoError(IoErrorCode::truncated, what_ + ": needed " + std::to_string(n) + " bytes at offset " +
                                                std::to_string(pos_) + ", " + std::to_string(remaining()) +
                                                " left");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string fixed(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string str() { return fixed(u32()); }

private:
  const std::vector<unsigned char>& data_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace io

/// Dataset container: "STV1", T H W D and sample_count as u32 LE, float32
/// payload, then optionally one u32 label per sample.
inline std::vector<unsigned char> encode_stv(const Dataset& data, bool with_labels = true) {
  if (with_labels && !data.labels.empty() && data.labels.size() != data.samples.size())
    throw Error("stv: label count does not match sample count");
  const auto& d = data.dims;
  for (std::size_t v : {d.steps, d.height, d.width, d.depth, data.samples.size()})
    if (v > std::numeric_limits<std::uint32_t>::max()) throw IoError(IoErrorCode::dim_overflow, "stv header field");
  io::Writer w;
  w.bytes("STV1", 4);
  w.u32(static_cast<std::uint32_t>(d.steps));
  w.u32(static_cast<std::uint32_t>(d.height));
  w.u32(static_cast<std::uint32_t>(d.width));
  w.u32(static_cast<std::uint32_t>(d.depth));
  w.u32(static_cast<std::uint32_t>(data.samples.size()));
  for (const auto& s : data.samples) {
    if (s.dims() != d) throw ShapeError("stv: sample " + s.dims().str() + " vs container " + d.str());
    for (double v : s.values()) w.f32(static_cast<float>(v));
  }
  if (with_labels && data.labeled())
    for (auto y : data.labels) w.u32(y);
  return std::move(w.buffer());
}

inline Dataset decode_stv(const std::vector<unsigned char>& bytes, const std::string& what = "stv") {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "STV1", 4) != 0)
    throw IoError(IoErrorCode::bad_magic, what + ": expected \"STV1\"");
  io::Reader r(bytes, what);
  r.fixed(4);
  Dataset data;
  data.dims.steps = r.u32();
  data.dims.height = r.u32();
  data.dims.width = r.u32();
  data.dims.depth = r.u32();
  const std::uint64_t count = r.u32();
  const auto& d = data.dims;
  if (d.steps == 0 || d.height == 0 || d.width == 0 || d.depth == 0)
    throw IoError(IoErrorCode::bad_dims, what + ": zero dimension in " + d.str());

  std::uint64_t per_sample = 0, payload = 0;
  if (__builtin_mul_overflow(static_cast<std::uint64_t>(d.steps), static_cast<std::uint64_t>(d.height), &per_sample) ||
      __builtin_mul_overflow(per_sample, static_cast<std::uint64_t>(d.width), &per_sample) ||
      __builtin_mul_overflow(per_sample, static_cast<std::uint64_t>(d.depth), &per_sample) ||
      __builtin_mul_overflow(per_sample, count, &payload) || __builtin_mul_overflow(payload, 4ull, &payload))
    throw IoError(IoErrorCode::dim_overflow, what + ": payload size overflows");
  if (payload > r.remaining())
    throw IoError(IoErrorCode::truncated, what + ": payload needs " + std::to_string(payload) + " bytes, " +
                                              std::to_string(r.remaining()) + " present");

  data.samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<double> values(per_sample);
    for (auto& v : values) v = static_cast<double>(r.f32());
    data.samples.emplace_back(d, std::move(values));
  }
  if (r.remaining() == 0) return data;
  if (r.remaining() != count * 4)
    throw IoError(IoErrorCode::trailing_bytes, what + ": " + std::to_string(r.remaining()) +
                                                   " bytes after payload, expected 0 or " +
                                                   std::to_string(count * 4) + " (label block)");
  data.labels.resize(count);
  for (auto& y : data.labels) y = r.u32();
  return data;
}

inline void save_stv(const std::string& path, const Dataset& data, bool with_labels = true) {
  io::write_file(path, encode_stv(data, with_labels));
}

inline Dataset load_stv(const std::string& path) { return decode_stv(io::read_file(path), path); }

}  // namespace strnn
