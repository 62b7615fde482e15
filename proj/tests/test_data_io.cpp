#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "helpers.hpp"

using namespace strnn;

namespace {

IoErrorCode decode_error(const std::vector<unsigned char>& bytes) {
  try {
    decode_stv(bytes);
  } catch (const IoError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return IoErrorCode::bad_record;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("strnn_test_" + name)).string();
}

Dataset random_floats(std::size_t n, VolumeDims d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.dims = d;
  for (std::size_t i = 0; i < n; ++i) {
    Volume v(d);
    for (auto& x : v.values()) x = static_cast<float>(rng.normal() * 100.0);
    data.samples.push_back(std::move(v));
    data.labels.push_back(static_cast<std::uint32_t>(rng.below(7)));
  }
  return data;
}

}  // namespace

TEST(Stv, EmptyFileIsBadMagic) {
  const auto path = temp_path("empty.stv");
  io::write_file(path, {});
  try {
    load_stv(path);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.code(), IoErrorCode::bad_magic);
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
  std::remove(path.c_str());
}

TEST(Stv, MissingFileIsOpenFailure) {
  try {
    load_stv(temp_path("does_not_exist.stv"));
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.code(), IoErrorCode::open_failed);
  }
}

TEST(Stv, OneScalarSampleLayout) {
  Dataset d;
  d.dims = {1, 1, 1, 1};
  d.samples.emplace_back(d.dims, std::vector<double>{2.5});
  d.labels = {1};
  const auto bytes = encode_stv(d);
  EXPECT_EQ(bytes.size(), 4u + 20u + 4u + 4u);
  EXPECT_EQ(encode_stv(d, false).size(), 4u + 20u + 4u);
  const auto back = decode_stv(bytes);
  EXPECT_EQ(back.samples[0].values()[0], 2.5);
  EXPECT_EQ(back.labels, (std::vector<std::uint32_t>{1}));
  EXPECT_FALSE(decode_stv(encode_stv(d, false)).labeled());
}

TEST(Stv, ThousandSamplesRoundTripBitwise) {
  const auto d = random_floats(1000, {2, 3, 2, 2}, 1);
  const auto path = temp_path("many.stv");
  save_stv(path, d);
  const auto back = load_stv(path);
  EXPECT_EQ(back.dims, d.dims);
  EXPECT_EQ(back.labels, d.labels);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(back.samples[i], d.samples[i]);
  EXPECT_EQ(encode_stv(back), encode_stv(d));
  std::remove(path.c_str());
}

TEST(Stv, MalformedInputsHaveDistinctErrors) {
  const auto good = encode_stv(random_floats(3, {1, 2, 2, 1}, 2));
  auto bytes = good;
  bytes[0] = 'X';
  EXPECT_EQ(decode_error(bytes), IoErrorCode::bad_magic);

  for (std::size_t cut : {std::size_t{5}, std::size_t{23}, std::size_t{30}, good.size() - 13})
    EXPECT_EQ(decode_error({good.begin(), good.begin() + static_cast<long>(cut)}), IoErrorCode::truncated) << cut;

  bytes = good;
  bytes.push_back(0);
  EXPECT_EQ(decode_error(bytes), IoErrorCode::trailing_bytes);

  bytes = good;
  bytes[8] = bytes[9] = bytes[10] = bytes[11] = 0;  // H = 0
  EXPECT_EQ(decode_error(bytes), IoErrorCode::bad_dims);

  bytes = good;
  for (std::size_t i = 4; i < 24; ++i) bytes[i] = 0xff;  // every field 2^32-1
  EXPECT_EQ(decode_error(bytes), IoErrorCode::dim_overflow);
}

TEST(Checkpoint, RoundTripPreservesParametersAndPredictions) {
  const auto cfg = testing_util::tiny_config(Activation::sigmoid);
  const auto model = StrnnModel::random(cfg, 9);
  const auto bytes = encode_checkpoint(model);
  const auto back = decode_checkpoint(bytes);
  EXPECT_EQ(back.params().flatten(), model.params().flatten());
  EXPECT_EQ(back.config().activation, Activation::sigmoid);
  EXPECT_EQ(encode_checkpoint(back), bytes);
  const auto data = testing_util::random_dataset(cfg, 12, 3);
  const auto a = evaluate(model, data), b = evaluate(back, data);
  EXPECT_EQ(a.confusion, b.confusion);
}

TEST(Checkpoint, EveryModeRoundTrips) {
  for (auto mode : {Mode::strnn, Mode::srnn_only, Mode::trnn_only, Mode::non_sparse}) {
    const auto model = StrnnModel::random(testing_util::tiny_config(Activation::relu, mode), 1);
    const auto back = decode_checkpoint(encode_checkpoint(model));
    EXPECT_EQ(back.config().mode, mode);
    EXPECT_EQ(back.params().flatten(), model.params().flatten());
  }
}

TEST(Checkpoint, RejectsDamage) {
  const auto bytes = encode_checkpoint(StrnnModel::random(testing_util::tiny_config(), 1));
  auto code = [](const std::vector<unsigned char>& b) {
    try {
      decode_checkpoint(b);
    } catch (const IoError& e) {
      return e.code();
    }
    return IoErrorCode::open_failed;
  };
  EXPECT_EQ(code({bytes.begin(), bytes.begin() + 3}), IoErrorCode::bad_magic);
  EXPECT_EQ(code({bytes.begin(), bytes.end() - 1}), IoErrorCode::truncated);
  auto extra = bytes;
  extra.push_back(1);
  EXPECT_EQ(code(extra), IoErrorCode::trailing_bytes);
  auto version = bytes;
  version[4] = 9;
  EXPECT_EQ(code(version), IoErrorCode::bad_record);
}

TEST(Synthetic, SameSeedSameBytes) {
  SyntheticSpec s;
  s.seed = 12;
  s.count = 40;
  EXPECT_EQ(encode_stv(gen_synthetic(s)), encode_stv(gen_synthetic(s)));
  auto t = s;
  t.seed = 13;
  EXPECT_NE(encode_stv(gen_synthetic(s)), encode_stv(gen_synthetic(t)));
}

TEST(Synthetic, ClassCountsDifferByAtMostOne) {
  for (std::size_t classes : {2u, 3u, 5u})
    for (std::size_t count : {10u, 31u, 100u}) {
      SyntheticSpec s;
      s.classes = classes;
      s.count = count;
      const auto d = gen_synthetic(s);
      std::vector<std::size_t> n(classes);
      for (auto y : d.labels) ++n[y];
      const auto [lo, hi] = std::minmax_element(n.begin(), n.end());
      EXPECT_LE(*hi - *lo, 1u);
    }
}

// With no noise, every sample equals one class mean at some placement;
// matching against all of them recovers the label.
TEST(Synthetic, NoiseFreeNearestTemplateIsPerfect) {
  for (double temporal : {0.0, 0.7}) {
    SyntheticSpec s;
    s.noise_sigma = 0.0;
    s.spatial_signal = 1.0;
    s.temporal_signal = temporal;
    s.count = 60;
    s.seed = 4;
    const SyntheticFamily family(s);
    const auto d = family.generate(s.count, 99);
    for (std::size_t i = 0; i < d.size(); ++i) {
      double best = INFINITY;
      std::uint32_t arg = 0;
      for (std::uint32_t c = 0; c < s.classes; ++c)
        for (const auto& a : family.placements(c)) {
          const auto m = family.mean(c, a);
          double dist = 0;
          for (std::size_t k = 0; k < m.values().size(); ++k) {
            const double e = m.values()[k] - d.samples[i].values()[k];
            dist += e * e;
          }
          if (dist < best) {
            best = dist;
            arg = c;
          }
        }
      EXPECT_EQ(arg, d.labels[i]);
    }
  }
}

TEST(Synthetic, ZeroSpatialSignalLeavesOnlyTheTemporalCue) {
  SyntheticSpec s;
  s.spatial_signal = 0.0;
  s.noise_sigma = 0.0;
  const SyntheticFamily family(s);
  for (std::size_t c = 0; c < s.classes; ++c) {
    const auto a = family.mean(c, family.placements(c).front());
    const auto b = family.mean(c, family.placements(c).back());
    EXPECT_EQ(a, b);
  }
  EXPECT_NE(family.mean(0, {0, 0}), family.mean(1, {0, 0}));
}

TEST(Synthetic, TemplatesAreDistinct) {
  SyntheticSpec s;
  s.classes = 6;
  const SyntheticFamily family(s);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = a + 1; b < 6; ++b) EXPECT_NE(family.shapes[a], family.shapes[b]);
}

TEST(Synthetic, RejectsOneClass) {
  SyntheticSpec s;
  s.classes = 1;
  EXPECT_THROW(gen_synthetic(s), Error);
}
