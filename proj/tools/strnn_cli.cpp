// strnn: train, evaluate, inspect and feed spatial-temporal RNN models.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "strnn/strnn.hpp"

namespace {

using namespace strnn;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

// Errors in flags or config files, reported with the usage exit code.
struct UsageError : Error {
  using Error::Error;
};

std::string dirname_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string{} : path.substr(0, slash);
}

struct ConfigFlags {
  std::string config, profile, mode, layout;
  std::optional<std::uint64_t> seed;
};

RunConfig load_run_config(const ConfigFlags& f, const std::string& fallback_profile = {}) {
  try {
    KeyValues kv;
    std::string base;
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      if (!in) throw UsageError("cannot open config '" + f.config + "'");
      kv = parse_key_values(in);
      base = dirname_of(f.config);
    }
    if (!f.profile.empty()) kv["profile"] = f.profile;
    if (!kv.count("profile") && !fallback_profile.empty()) kv["profile"] = fallback_profile;
    if (!f.mode.empty()) kv["mode"] = f.mode;
    if (!f.layout.empty()) kv["layout"] = f.layout;
    if (f.seed) kv["seed"] = std::to_string(*f.seed);
    return make_run_config(kv, base);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::vector<BandSpec> parse_bands(const std::string& text) {
  if (text.empty()) return default_bands();
  std::vector<BandSpec> bands;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':'), dash = item.find('-', colon == std::string::npos ? 0 : colon);
    if (colon == std::string::npos || dash == std::string::npos)
      throw UsageError("band '" + item + "' must look like name:low-high");
    bands.push_back({item.substr(0, colon), parse_double("bands", item.substr(colon + 1, dash - colon - 1)),
                     parse_double("bands", item.substr(dash + 1))});
  }
  try {
    validate_bands(bands);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return bands;
}

void print_metrics_header() { std::cout << "epoch\tdata_loss\tpenalty\ttrain_acc\n"; }

void print_metrics(const EpochMetrics& m) {
  std::cout << m.epoch << '\t' << format_double(m.data_loss) << '\t' << format_double(m.penalty) << '\t'
            << format_double(m.train_accuracy) << '\n'
            << std::flush;
}

int cmd_train(const ConfigFlags& flags, const std::string& data_path, const std::string& out) {
  const auto rc = load_run_config(flags);
  const auto data = load_stv(data_path);
  if (!data.labeled()) throw IoError(IoErrorCode::bad_record, data_path + ": training data needs labels");
  auto model = StrnnModel::random(rc.model, rc.train.seed);
  std::cerr << "model: " << to_string(rc.model.mode) << ", " << model.params().parameter_count()
            << " parameters, " << data.size() << " samples\n";
  print_metrics_header();
  std::size_t clamped = 0;
  train(model, data, rc.train, [&](const EpochMetrics& m) {
    print_metrics(m);
    clamped += m.clamped;
  });
  if (clamped) std::cerr << "warning: probability floor hit " << clamped << " times\n";
  save_checkpoint(out, model);
  return kOk;
}

// Classes are 0-based on disk and shown 1-based here.
void print_report(const EvalReport& r) {
  std::cout << "accuracy\t" << std::fixed << std::setprecision(4) << r.accuracy() << "\t(" << r.correct << "/"
            << r.total << ")\n";
  for (std::size_t c = 0; c < r.classes; ++c)
    std::cout << "class " << c + 1 << "\t" << r.class_accuracy(c) << "\t(" << r.at(c, c) << "/" << r.row_total(c)
              << ")\n";
  std::cout << "confusion (rows: true, columns: predicted)\n      ";
  for (std::size_t c = 0; c < r.classes; ++c) std::cout << std::setw(7) << c + 1;
  std::cout << '\n';
  for (std::size_t t = 0; t < r.classes; ++t) {
    std::cout << std::setw(6) << t + 1;
    for (std::size_t p = 0; p < r.classes; ++p) std::cout << std::setw(7) << r.at(t, p);
    std::cout << '\n';
  }
  std::cout.unsetf(std::ios::floatfield);
}

int cmd_eval(const std::string& checkpoint, const std::string& data_path) {
  const auto model = load_checkpoint(checkpoint);
  const auto data = load_stv(data_path);
  if (!data.labeled()) throw IoError(IoErrorCode::bad_record, data_path + ": evaluation data needs labels");
  if (data.dims != model.config().volume_dims())
    throw IoError(IoErrorCode::bad_dims,
                  data_path + ": samples are " + data.dims.str() + ", model expects " +
                      model.config().volume_dims().str());
  print_report(evaluate(model, data));
  return kOk;
}

// Random inputs and labels sized for the model.
Dataset random_batch(const ModelConfig& cfg, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.dims = cfg.volume_dims();
  for (std::size_t i = 0; i < count; ++i) {
    Volume v(d.dims);
    for (auto& x : v.values()) x = rng.normal();
    d.samples.push_back(std::move(v));
    d.labels.push_back(static_cast<std::uint32_t>(rng.below(cfg.classes)));
  }
  return d;
}

int cmd_gradcheck(const ConfigFlags& flags, double tol, double step, std::size_t batch) {
  const auto rc = load_run_config(flags, "tiny");
  bool ok = true;
  for (auto act : {Activation::relu, Activation::sigmoid}) {
    auto cfg = rc.model;
    cfg.activation = act;
    const auto model = StrnnModel::random(cfg, rc.train.seed);
    const auto data = random_batch(cfg, batch, rc.train.seed + 1);
    const auto report = grad_check(model, data, step);
    const bool pass = report.passed(tol);
    ok = ok && pass;
    std::cout << "activation " << to_string(act) << ": " << (pass ? "PASS" : "FAIL") << "  worst "
              << std::scientific << std::setprecision(3) << report.worst() << " (tol " << tol << ")\n";
    for (const auto& t : report.tensors)
      std::cout << "  " << std::left << std::setw(24) << t.name << std::right << std::setw(6) << t.entries
                << "  " << t.max_relative_error << (t.max_relative_error < tol ? "" : "  <-- exceeds")
                << (t.all_zero ? "  (zero gradient)" : "") << '\n';
    std::cout.unsetf(std::ios::floatfield);
  }
  return ok ? kOk : kNumeric;
}

struct ExtractFlags {
  std::string data, out, layout = "seed62", bands;
  std::size_t width = 9, decimate = 1;
  double rate = 256.0;
};

// Raw recordings arrive as STV samples with H = channels, W = D = 1 and
// T = time samples; every window inherits its recording's label.
int cmd_extract(const ExtractFlags& f) {
  const auto bands = parse_bands(f.bands);
  GridLayout layout = [&] {
    try {
      return parse_layout_spec(f.layout);
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }();
  if (f.decimate == 0) throw UsageError("--decimate must be >= 1");
  const double rate = f.rate / static_cast<double>(f.decimate);
  const auto raw = load_stv(f.data);
  if (raw.dims.width != 1 || raw.dims.depth != 1)
    throw IoError(IoErrorCode::bad_dims, f.data + ": raw recordings need W = D = 1, got " + raw.dims.str());

  Dataset out;
  out.dims = {f.width, layout.height(), layout.width(), bands.size()};
  std::size_t floored = 0;
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto& rec = raw.samples[r];
    std::vector<std::vector<double>> channels(raw.dims.height);
    for (std::size_t c = 0; c < raw.dims.height; ++c) {
      std::vector<double> x(raw.dims.steps);
      for (std::size_t t = 0; t < raw.dims.steps; ++t) x[t] = rec.at(t, c, 0)[0];
      channels[c] = decimate(x, f.decimate);
    }
    const auto series = extract_band_series(channels, bands, rate);
    floored += series.floored;
    std::string warning;
    auto windows = slice_windows(series, layout, f.width, &warning);
    if (!warning.empty()) std::cerr << "warning: recording " << r << ": " << warning << '\n';
    for (auto& w : windows) {
      out.samples.push_back(std::move(w));
      if (raw.labeled()) out.labels.push_back(raw.labels[r]);
    }
  }
  if (floored) std::cerr << "warning: " << floored << " band powers were zero and floored\n";
  save_stv(f.out, out);
  std::cerr << "wrote " << out.size() << " volumes of " << out.dims.str() << " to " << f.out << '\n';
  return kOk;
}

int cmd_saliency(const std::string& checkpoint, const std::string& layout_text, const std::string& out) {
  const auto model = load_checkpoint(checkpoint);
  if (!layout_text.empty()) {
    GridLayout given = [&] {
      try {
        return parse_layout_spec(layout_text);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }();
    if (layout_spec(given) != layout_spec(model.config().layout))
      throw IoError(IoErrorCode::bad_dims, "--layout " + layout_spec(given) + " differs from the checkpoint's " +
                                               layout_spec(model.config().layout));
  }
  const auto map = saliency(model);
  const auto& layout = map.layout;
  std::cout << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < layout.height(); ++i) {
    for (std::size_t j = 0; j < layout.width(); ++j) {
      if (layout.occupied(static_cast<long>(i), static_cast<long>(j)))
        std::cout << std::setw(6) << map.at(i, j);
      else
        std::cout << std::setw(6) << "  .";
    }
    std::cout << '\n';
  }
  std::cout.unsetf(std::ios::floatfield);
  if (!out.empty()) {
    std::ofstream csv(out);
    if (!csv) throw IoError(IoErrorCode::open_failed, out);
    csv << "cell,row,col,weight\n";
    const auto& cells = layout.cells();
    for (std::size_t k = 0; k < cells.size(); ++k)
      csv << k << ',' << cells[k].row << ',' << cells[k].col << ',' << format_double(map.weights[k]) << '\n';
  }
  return kOk;
}

int cmd_synth(SyntheticSpec spec, std::optional<std::uint64_t> sample_seed, const std::string& out) {
  try {
    const SyntheticFamily family(spec);
    const auto data = family.generate(spec.count, sample_seed.value_or(spec.seed ^ 0x9e3779b97f4a7c15ULL));
    save_stv(out, data);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-temporal RNN toolkit"};
  app.require_subcommand(1);

  ConfigFlags cfg;
  auto add_config_flags = [&](CLI::App* sub) {
    sub->add_option("--config", cfg.config, "key=value run configuration");
    sub->add_option("--profile", cfg.profile, "dimension preset: seed, ckplus or tiny");
    sub->add_option("--mode", cfg.mode, "strnn, srnn_only, trnn_only or non_sparse");
    sub->add_option("--layout", cfg.layout, "seed62, HxW, HxW:rows or a layout file");
    sub->add_option("--seed", cfg.seed, "random seed");
  };

  std::string data, out, checkpoint;

  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  add_config_flags(train);
  train->add_option("--data", data, "labeled training volumes (.stv)")->required();
  train->add_option("--out", out, "checkpoint path")->required();

  auto* eval = app.add_subcommand("eval", "accuracy and confusion table of a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  eval->add_option("--data", data, "labeled test volumes (.stv)")->required();
  std::optional<std::uint64_t> unused_seed;
  eval->add_option("--seed", unused_seed, "accepted for uniformity; evaluation is deterministic");

  double tol = 1e-4, step = 1e-4;
  std::size_t batch = 2;
  auto* gradcheck = app.add_subcommand("gradcheck", "compare gradients with finite differences");
  add_config_flags(gradcheck);
  gradcheck->add_option("--tol", tol, "largest accepted relative error")->capture_default_str();
  gradcheck->add_option("--step", step, "finite-difference step")->capture_default_str()->check(
      CLI::PositiveNumber);
  gradcheck->add_option("--batch", batch, "random samples in the checked batch")->capture_default_str()->check(
      CLI::PositiveNumber);

  ExtractFlags ex;
  auto* extract = app.add_subcommand("extract", "differential-entropy volumes from raw recordings");
  extract->add_option("--data", ex.data, "raw recordings (.stv, H = channels, W = D = 1)")->required();
  extract->add_option("--out", ex.out, "output volumes (.stv)")->required();
  extract->add_option("--layout", ex.layout, "electrode layout")->capture_default_str();
  extract->add_option("--width", ex.width, "window width in 1 s steps")->capture_default_str();
  extract->add_option("--rate", ex.rate, "sampling rate of the raw signal in Hz")->capture_default_str();
  extract->add_option("--decimate", ex.decimate, "block-average decimation factor")->capture_default_str();
  extract->add_option("--bands", ex.bands, "name:low-high,... (default delta..gamma)");
  extract->add_option("--seed", unused_seed, "accepted for uniformity; extraction is deterministic");

  std::string layout_text;
  auto* sal = app.add_subcommand("saliency", "per-cell weight of the spatial projections");
  sal->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  sal->add_option("--layout", layout_text, "expected layout (checked against the checkpoint)");
  sal->add_option("--out", out, "CSV with one row per occupied cell");
  sal->add_option("--seed", unused_seed, "accepted for uniformity; the report is deterministic");

  SyntheticSpec spec;
  std::optional<std::uint64_t> sample_seed;
  auto* synth = app.add_subcommand("synth", "labeled synthetic volumes");
  synth->add_option("--out", out, "output volumes (.stv)")->required();
  synth->add_option("--count", spec.count, "samples")->capture_default_str();
  synth->add_option("--classes", spec.classes, "classes")->capture_default_str();
  synth->add_option("--height", spec.height, "grid rows")->capture_default_str();
  synth->add_option("--width", spec.width, "grid columns")->capture_default_str();
  synth->add_option("--steps", spec.steps, "time slices")->capture_default_str();
  synth->add_option("--depth", spec.depth, "features per cell")->capture_default_str();
  synth->add_option("--spatial", spec.spatial_signal, "spatial template amplitude")->capture_default_str();
  synth->add_option("--temporal", spec.temporal_signal, "temporal envelope amplitude")->capture_default_str();
  synth->add_option("--noise", spec.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  synth->add_option("--single-cue", spec.single_cue_fraction, "fraction of samples carrying one cue only")
      ->capture_default_str();
  synth->add_flag("!--fixed-position", spec.jitter, "anchor every template at its first placement");
  synth->add_option("--seed", spec.seed, "family seed")->capture_default_str();
  synth->add_option("--sample-seed", sample_seed, "draw seed (default derived from --seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(cfg, data, out);
    if (*eval) return cmd_eval(checkpoint, data);
    if (*gradcheck) return cmd_gradcheck(cfg, tol, step, batch);
    if (*extract) return cmd_extract(ex);
    if (*sal) return cmd_saliency(checkpoint, layout_text, out);
    if (*synth) return cmd_synth(spec, sample_seed, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
