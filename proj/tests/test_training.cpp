#include <gtest/gtest.h>

#include <cstdlib>

#include "helpers.hpp"

using namespace strnn;
using testing_util::random_dataset;
using testing_util::tiny_config;

namespace {

TrainConfig quick(std::size_t epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 4;
  t.seed = 3;
  return t;
}

}  // namespace

TEST(Train, ZeroEpochsChangesNothing) {
  auto model = StrnnModel::random(tiny_config(), 1);
  const auto before = model.params().flatten();
  const auto h = train(model, random_dataset(model.config(), 6, 2), quick(0));
  EXPECT_TRUE(h.empty());
  EXPECT_EQ(model.params().flatten(), before);
}

TEST(Train, ZeroLearningRateChangesNothing) {
  auto model = StrnnModel::random(tiny_config(), 1);
  const auto before = model.params().flatten();
  auto cfg = quick(3);
  cfg.learning_rate = 0.0;
  const auto h = train(model, random_dataset(model.config(), 6, 2), cfg);
  EXPECT_EQ(h.size(), 3u);
  EXPECT_EQ(model.params().flatten(), before);
}

TEST(Train, RejectsInvalidConfig) {
  auto model = StrnnModel::random(tiny_config(), 1);
  const auto data = random_dataset(model.config(), 4, 2);
  auto cfg = quick(1);
  cfg.batch_size = 0;
  EXPECT_THROW(train(model, data, cfg), Error);
  cfg = quick(1);
  cfg.learning_rate = -1;
  EXPECT_THROW(train(model, data, cfg), Error);
}

TEST(Train, ReducesTheLoss) {
  auto model = StrnnModel::random(tiny_config(), 4);
  const auto h = train(model, random_dataset(model.config(), 12, 5), quick(30));
  EXPECT_LT(h.back().data_loss, h.front().data_loss);
}

TEST(Train, BitIdenticalAcrossRunsAndThreadCounts) {
  const auto cfg = tiny_config(Activation::sigmoid);
  const auto data = random_dataset(cfg, 10, 6);
  auto a = StrnnModel::random(cfg, 7), b = a;
  setenv("STRNN_THREADS", "1", 1);
  train(a, data, quick(5));
  setenv("STRNN_THREADS", "3", 1);
  train(b, data, quick(5));
  unsetenv("STRNN_THREADS");
  EXPECT_EQ(a.params().flatten(), b.params().flatten());
}

TEST(Train, NonSparseReportsZeroPenalty) {
  auto cfg = tiny_config(Activation::relu, Mode::non_sparse);
  EXPECT_EQ(cfg.loss().lambda1, 0.0);
  EXPECT_EQ(cfg.loss().lambda2, 0.0);
  auto model = StrnnModel::random(cfg, 1);
  for (const auto& m : train(model, random_dataset(cfg, 6, 1), quick(2))) EXPECT_EQ(m.penalty, 0.0);
}

TEST(Train, DivergenceIsReportedWithItsLocation) {
  auto model = StrnnModel::random(tiny_config(), 1);
  auto data = random_dataset(model.config(), 4, 1);
  data.samples[2].values()[0] = std::nan("");
  try {
    train(model, data, quick(1));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

class GradCheckModes : public ::testing::TestWithParam<std::tuple<Mode, Activation>> {};

TEST_P(GradCheckModes, WithinTolerance) {
  const auto [mode, act] = GetParam();
  const auto cfg = tiny_config(act, mode);
  const auto model = StrnnModel::random(cfg, 11);
  const auto report = grad_check(model, random_dataset(cfg, 2, 12), 1e-4);
  for (const auto& t : report.tensors) EXPECT_LT(t.max_relative_error, 1e-4) << t.name;
  EXPECT_TRUE(report.passed(1e-4));
}

INSTANTIATE_TEST_SUITE_P(AllModes, GradCheckModes,
                         ::testing::Combine(::testing::Values(Mode::strnn, Mode::srnn_only, Mode::trnn_only,
                                                              Mode::non_sparse),
                                            ::testing::Values(Activation::relu, Activation::sigmoid)));

TEST(GradCheck, ZeroParametersWithReluAreReportedNotFailed) {
  const auto cfg = tiny_config(Activation::relu);
  const StrnnModel model(cfg, StrnnParams::zeros(cfg));
  const auto report = grad_check(model, random_dataset(cfg, 2, 1), 1e-4);
  EXPECT_TRUE(report.passed(1e-4));
  for (const auto& t : report.tensors)
    if (t.name.ends_with(".W") && t.name.starts_with("srnn.")) EXPECT_TRUE(t.all_zero) << t.name;
}

TEST(GradCheck, ZeroToleranceFails) {
  const auto cfg = tiny_config(Activation::sigmoid);
  const auto model = StrnnModel::random(cfg, 2);
  EXPECT_FALSE(grad_check(model, random_dataset(cfg, 2, 3), 1e-4).passed(0.0));
}

TEST(Evaluate, CountsAndAccuracy) {
  const auto cfg = tiny_config();
  const auto model = StrnnModel::random(cfg, 5);
  const auto data = random_dataset(cfg, 30, 8);
  const auto r = evaluate(model, data);
  std::size_t total = 0, trace = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(r.row_total(t), 10u);
    trace += r.at(t, t);
    for (std::size_t p = 0; p < 3; ++p) total += r.at(t, p);
  }
  EXPECT_EQ(total, 30u);
  EXPECT_EQ(trace, r.correct);
  EXPECT_DOUBLE_EQ(r.accuracy(), static_cast<double>(trace) / 30.0);
}

TEST(Evaluate, LabelsFromPredictionsGiveADiagonalTable) {
  const auto cfg = tiny_config();
  const auto model = StrnnModel::random(cfg, 5);
  auto data = random_dataset(cfg, 20, 8);
  for (std::size_t i = 0; i < data.size(); ++i) data.labels[i] = model.predict(data.samples[i]);
  const auto r = evaluate(model, data);
  EXPECT_EQ(r.correct, 20u);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t p = 0; p < 3; ++p)
      if (t != p) EXPECT_EQ(r.at(t, p), 0u);
}

TEST(Evaluate, UntrainedModelIsNearChance) {
  SyntheticSpec s;
  s.count = 600;
  const auto data = gen_synthetic(s);
  auto kv = parse_key_values("profile=seed\nlayout=4x4\nsrnn_hidden=6\nsrnn_output=6\nkp=3\ntrnn_hidden=6\nlp=3\n");
  double mean = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) mean += evaluate(StrnnModel::random(make_run_config(kv).model, seed), data).accuracy() / 5;
  EXPECT_NEAR(mean, 1.0 / 3.0, 0.12);
}

TEST(Saliency, UniformProjectionsGiveAFlatMap) {
  const auto cfg = tiny_config();
  Rng rng(1);
  auto params = StrnnParams::random(cfg, rng);
  for (auto& d : params.srnn.directions) d.projection = Matrix(9, 2, 0.4);
  const auto map = saliency(StrnnModel(cfg, params));
  for (double w : map.weights) EXPECT_EQ(w, 1.0);
}

TEST(Saliency, SingleNonzeroRowGivesOneHotCell) {
  const auto cfg = tiny_config();
  Rng rng(2);
  auto params = StrnnParams::random(cfg, rng);
  for (auto& d : params.srnn.directions) d.projection = Matrix(9, 2);
  params.srnn.directions[2].projection(5, 1) = -0.7;
  const auto map = saliency(StrnnModel(cfg, params));
  const auto cell = cfg.layout.cells()[5];
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(map.at(i, j), i == cell.row && j == cell.col ? 1.0 : 0.0);
}

TEST(Saliency, ValuesInUnitIntervalAndNeedsSpatialLayer) {
  const auto model = StrnnModel::random(tiny_config(), 3);
  for (double w : saliency(model).weights) {
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0);
  }
  EXPECT_THROW(saliency(StrnnModel::random(tiny_config(Activation::relu, Mode::trnn_only), 1)), Error);
}

TEST(Sparsity, PenaltyShrinksProjections) {
  SyntheticSpec s;
  s.count = 30;
  const auto data = gen_synthetic(s);
  auto kv = parse_key_values("profile=seed\nlayout=4x4\nsrnn_hidden=6\nsrnn_output=6\nkp=3\ntrnn_hidden=6\nlp=3\n");
  auto run = [&](double lambda) {
    kv["lambda1"] = kv["lambda2"] = format_double(lambda);
    const auto cfg = make_run_config(kv).model;
    auto model = StrnnModel::random(cfg, 0);
    train(model, data, quick(40));
    double l1 = 0;
    std::size_t small = 0, total = 0;
    const auto set = model.projections();
    for (const auto& group : {set.spatial, set.temporal})
      for (const auto* g : group) {
        l1 += l1_norm(g->values());
        for (double v : g->values()) small += std::abs(v) < 1e-3;
        total += g->size();
      }
    return std::pair{l1, static_cast<double>(small) / static_cast<double>(total)};
  };
  const auto dense = run(0.0), sparse = run(0.1);
  EXPECT_LT(sparse.first, dense.first);
  EXPECT_GT(sparse.second, dense.second);
}

// The L1 pull is slow at lr 1e-2: after 100 epochs the map is still flat,
// so the check trains to convergence.
TEST(Saliency, SparseTrainingConcentratesWeight) {
  SyntheticSpec s;
  s.count = 30;
  const auto data = gen_synthetic(s);
  const auto rc = make_run_config(parse_key_values(
      "profile=seed\nlayout=4x4\nsrnn_hidden=6\nsrnn_output=6\nkp=3\ntrnn_hidden=6\nlp=3\nlambda1=0.01\nepochs=1000\n"));
  auto model = StrnnModel::random(rc.model, 0);
  train(model, data, rc.train);
  const auto map = saliency(model);
  std::size_t above = 0;
  for (double w : map.weights) above += w > 0.1;
  EXPECT_LT(2 * above, map.weights.size()) << above << " of " << map.weights.size() << " cells above 0.1";
}
