#pragma once

#include <cstring>
#include <string>
#include <vector>

#include "strnn/model.hpp"
#include "strnn/run_config.hpp"
#include "strnn/stv_io.hpp"

namespace strnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "STRN", u32 version, length-prefixed config echo (key=value text),
/// u32 tensor count, then per tensor: length-prefixed name, u32 rows,
/// u32 cols, rows*cols float64. All integers little-endian.
inline std::vector<unsigned char> encode_checkpoint(const StrnnModel& model) {
  io::Writer w;
  w.bytes("STRN", 4);
  w.u32(kCheckpointVersion);
  w.str(model_config_text(model.config()));
  std::uint32_t count = 0;
  StrnnParams::visit(model.params(), [&](const std::string&, const auto&) { ++count; });
  w.u32(count);
  StrnnParams::visit(model.params(), [&](const std::string& name, const auto& t) {
    w.str(name);
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>) {
      w.u32(static_cast<std::uint32_t>(t.rows()));
      w.u32(static_cast<std::uint32_t>(t.cols()));
    } else {
      w.u32(static_cast<std::uint32_t>(t.size()));
      w.u32(1);
    }
    for (double v : t.values()) w.f64(v);
  });
  return std::move(w.buffer());
}

inline StrnnModel decode_checkpoint(const std::vector<unsigned char>& bytes, const std::string& what = "checkpoint") {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "STRN", 4) != 0)
    throw IoError(IoErrorCode::bad_magic, what + ": expected \"STRN\"");
  io::Reader r(bytes, what);
  r.fixed(4);
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw IoError(IoErrorCode::bad_record, what + ": unsupported version " + std::to_string(version));
  ModelConfig cfg;
  try {
    cfg = make_run_config(parse_key_values(r.str())).model;
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(IoErrorCode::bad_record, what + ": config echo: " + e.what());
  }

  StrnnParams params = StrnnParams::zeros(cfg);
  const auto count = r.u32();
  std::uint32_t expected = 0;
  StrnnParams::visit(params, [&](const std::string&, const auto&) { ++expected; });
  if (count != expected)
    throw IoError(IoErrorCode::bad_record, what + ": " + std::to_string(count) + " tensors, model needs " +
                                               std::to_string(expected));
  StrnnParams::visit(params, [&](const std::string& name, auto& t) {
    const auto got = r.str();
    if (got != name) throw IoError(IoErrorCode::bad_record, what + ": expected tensor '" + name + "', found '" + got + "'");
    const std::uint64_t rows = r.u32(), cols = r.u32();
    if (rows * cols != t.values().size())
      throw IoError(IoErrorCode::bad_record, what + ": tensor '" + name + "' has " + std::to_string(rows) + "x" +
                                                 std::to_string(cols) + " entries, expected " +
                                                 std::to_string(t.values().size()));
    for (auto& v : t.values()) v = r.f64();
  });
  if (r.remaining() != 0) throw IoError(IoErrorCode::trailing_bytes, what + ": data after last tensor");
  return StrnnModel(cfg, std::move(params));
}

inline void save_checkpoint(const std::string& path, const StrnnModel& model) {
  io::write_file(path, encode_checkpoint(model));
}

inline StrnnModel load_checkpoint(const std::string& path) {
  return decode_checkpoint(io::read_file(path), path);
}

}  // namespace strnn
