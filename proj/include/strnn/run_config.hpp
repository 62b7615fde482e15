#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "strnn/electrode_layout.hpp"
#include "strnn/model.hpp"
#include "strnn/spatial_graph.hpp"
#include "strnn/training.hpp"

namespace strnn {

/// Ordered key=value pairs; '#' starts a comment line.
using KeyValues = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw Error("config line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw Error("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline KeyValues parse_key_values(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error("config: '" + key + "' expects a number, got '" + s + "'");
  return v;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error("config: '" + key + "' expects a nonnegative integer, got '" + s + "'");
  return v;
}

/// Layout spec: "seed62", "HxW" (full grid), "HxW:rows" with rows of '#'/'.'
/// separated by '/', or a path to a layout file.
inline GridLayout parse_layout_spec(const std::string& spec, const std::string& base_dir = {}) {
  if (spec == "seed62") return seed_layout_62();
  const auto x = spec.find('x');
  if (x != std::string::npos && x > 0 && std::isdigit(static_cast<unsigned char>(spec[0]))) {
    const auto colon = spec.find(':');
    const std::string dims = spec.substr(0, colon);
    const auto h = parse_unsigned("layout", dims.substr(0, x));
    const auto w = parse_unsigned("layout", dims.substr(x + 1));
    if (colon == std::string::npos) return GridLayout::full(h, w);
    std::string text = std::to_string(h) + " " + std::to_string(w) + "\n";
    for (char c : spec.substr(colon + 1)) text += c == '/' ? '\n' : c;
    return parse_layout(text + "\n");
  }
  std::string path = spec;
  if (!base_dir.empty() && !path.empty() && path[0] != '/') path = base_dir + "/" + path;
  std::ifstream in(path);
  if (!in) throw Error("layout file '" + path + "' cannot be opened");
  return parse_layout(in);
}

inline std::string layout_spec(const GridLayout& layout) {
  std::string s = std::to_string(layout.height()) + "x" + std::to_string(layout.width()) + ":";
  for (std::size_t i = 0; i < layout.height(); ++i) {
    if (i) s += '/';
    for (std::size_t j = 0; j < layout.width(); ++j)
      s += layout.occupied(static_cast<long>(i), static_cast<long>(j)) ? '#' : '.';
  }
  return s;
}

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

inline const std::set<std::string>& dimension_keys() {
  static const std::set<std::string> keys = {"layout", "input_dim", "srnn_hidden", "srnn_output", "kp",
                                             "trnn_hidden", "steps", "lp", "classes"};
  return keys;
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = dimension_keys();
    for (const char* extra : {"profile", "mode", "activation", "seed", "learning_rate", "momentum", "epochs",
                              "batch_size", "lambda1", "lambda2", "grad_clip"})
      k.insert(extra);
    return k;
  }();
  return keys;
}

/// Published dimension presets. seed: 62-electrode EEG, 5 bands, 9 s
/// windows, 3 classes. ckplus: 7x7x512 face features, 44 frames, 7 classes.
/// tiny: 3x3 grid used for gradient checks.
inline KeyValues profile_values(const std::string& name) {
  if (name == "seed")
    return {{"layout", "seed62"}, {"input_dim", "5"}, {"srnn_hidden", "30"}, {"srnn_output", "30"},
            {"kp", "10"},         {"trnn_hidden", "30"}, {"steps", "9"},     {"lp", "5"},
            {"classes", "3"}};
  if (name == "ckplus")
    return {{"layout", "7x7"}, {"input_dim", "512"}, {"srnn_hidden", "50"}, {"srnn_output", "50"},
            {"kp", "10"},      {"trnn_hidden", "150"}, {"steps", "44"},     {"lp", "5"},
            {"classes", "7"}};
  if (name == "tiny")
    return {{"layout", "3x3"}, {"input_dim", "2"}, {"srnn_hidden", "4"}, {"srnn_output", "4"}, {"kp", "2"},
            {"trnn_hidden", "3"}, {"steps", "2"},  {"lp", "2"},          {"classes", "3"}};
  throw Error("unknown profile '" + name + "' (expected seed|ckplus|tiny)");
}

inline constexpr double kDefaultLambda = 1e-3;

/// Builds a run configuration; explicit keys override the profile. Without a
/// profile every dimension key is required.
inline RunConfig make_run_config(const KeyValues& given, const std::string& base_dir = {}) {
  for (const auto& [k, v] : given)
    if (!known_keys().count(k)) throw Error("config: unknown key '" + k + "'");

  KeyValues kv;
  if (auto it = given.find("profile"); it != given.end()) kv = profile_values(it->second);
  for (const auto& [k, v] : given) kv[k] = v;
  for (const auto& k : dimension_keys())
    if (!kv.count(k)) throw Error("config: missing required key '" + k + "' (or set profile=...)");

  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto count = [&](const std::string& k) { return static_cast<std::size_t>(parse_unsigned(k, *get(k))); };

  RunConfig rc;
  auto& m = rc.model;
  m.layout = parse_layout_spec(*get("layout"), base_dir);
  m.input_dim = count("input_dim");
  m.srnn_hidden = count("srnn_hidden");
  m.srnn_output = count("srnn_output");
  m.spatial_projected = count("kp");
  m.trnn_hidden = count("trnn_hidden");
  m.steps = count("steps");
  m.temporal_projected = count("lp");
  m.classes = count("classes");
  m.lambda1 = m.lambda2 = kDefaultLambda;
  if (auto v = get("mode")) m.mode = parse_mode(*v);
  if (auto v = get("activation")) m.activation = parse_activation(*v);
  if (auto v = get("lambda1")) m.lambda1 = parse_double("lambda1", *v);
  if (auto v = get("lambda2")) m.lambda2 = parse_double("lambda2", *v);
  if (m.mode == Mode::non_sparse) m.lambda1 = m.lambda2 = 0.0;
  m.validate();

  auto& t = rc.train;
  if (auto v = get("seed")) t.seed = parse_unsigned("seed", *v);
  if (auto v = get("learning_rate")) t.learning_rate = parse_double("learning_rate", *v);
  if (auto v = get("momentum")) t.momentum = parse_double("momentum", *v);
  if (auto v = get("epochs")) t.epochs = static_cast<std::size_t>(parse_unsigned("epochs", *v));
  if (auto v = get("batch_size")) t.batch_size = static_cast<std::size_t>(parse_unsigned("batch_size", *v));
  if (auto v = get("grad_clip")) {
    if (*v == "none")
      t.grad_clip.reset();
    else
      t.grad_clip = parse_double("grad_clip", *v);
  }
  t.validate();
  return rc;
}

/// key=value lines describing a model, accepted back by make_run_config.
inline std::string model_config_text(const ModelConfig& m) {
  std::ostringstream out;
  out << "mode=" << to_string(m.mode) << '\n'
      << "activation=" << to_string(m.activation) << '\n'
      << "layout=" << layout_spec(m.layout) << '\n'
      << "input_dim=" << m.input_dim << '\n'
      << "srnn_hidden=" << m.srnn_hidden << '\n'
      << "srnn_output=" << m.srnn_output << '\n'
      << "kp=" << m.spatial_projected << '\n'
      << "trnn_hidden=" << m.trnn_hidden << '\n'
      << "steps=" << m.steps << '\n'
      << "lp=" << m.temporal_projected << '\n'
      << "classes=" << m.classes << '\n'
      << "lambda1=" << format_double(m.lambda1) << '\n'
      << "lambda2=" << format_double(m.lambda2) << '\n';
  return out.str();
}

}  // namespace strnn
