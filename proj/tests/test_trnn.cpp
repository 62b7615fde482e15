#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles/naive_rnn.hpp"
#include "strnn/trnn.hpp"

using namespace strnn;

namespace {

Vector flatten(const TrnnParams& p) {
  std::vector<double> out;
  TrnnParams::visit(p, [&](const std::string&, const auto& t) { out.insert(out.end(), t.values().begin(), t.values().end()); });
  return Vector(std::move(out));
}

void assign(TrnnParams& p, const Vector& flat) {
  std::size_t at = 0;
  TrnnParams::visit(p, [&](const std::string&, auto& t) {
    for (auto& v : t.values()) v = flat[at++];
  });
}

std::vector<Vector> random_sequence(std::size_t steps, std::size_t dim, Rng& rng) {
  std::vector<Vector> m(steps, Vector(dim));
  for (auto& v : m)
    for (auto& e : v.values()) e = rng.uniform(-1, 1);
  return m;
}

std::vector<std::vector<double>> plain(const std::vector<Vector>& m) {
  std::vector<std::vector<double>> out;
  for (const auto& v : m) out.push_back(v.raw());
  return out;
}

}  // namespace

TEST(TrnnForward, LengthOneIgnoresRecurrence) {
  Rng rng(1);
  auto p = TrnnParams::random({2, 3, 1, 1, 2}, Activation::sigmoid, rng);
  const auto m = random_sequence(1, 2, rng);
  const auto a = trnn_forward(p, m);
  p.forward.recurrent_weights *= 7.0;
  p.backward.recurrent_weights *= -3.0;
  const auto b = trnn_forward(p, m);
  EXPECT_EQ(a.logits, b.logits);
  Vector z = p.forward.bias;
  matvec_add(p.forward.input_weights, m[0].values(), z.values());
  EXPECT_EQ(a.forward_hidden[0], activation(z, Activation::sigmoid));
}

TEST(TrnnForward, ZeroInputZeroBiasReluGivesZeroLogits) {
  Rng rng(2);
  auto p = TrnnParams::random({3, 4, 5, 2, 3}, Activation::relu, rng);
  p.forward.bias.fill(0.0);
  p.backward.bias.fill(0.0);
  const std::vector<Vector> m(5, Vector(3));
  EXPECT_EQ(trnn_forward(p, m).logits, Vector(3));
}

TEST(TrnnForward, ScalarTwoStepByHand) {
  auto p = TrnnParams::zeros({1, 1, 2, 2, 1}, Activation::relu);
  for (auto* c : {&p.forward, &p.backward}) {
    c->input_weights(0, 0) = 1.0;
    c->recurrent_weights(0, 0) = 1.0;
    c->projection = Matrix::identity(2);
  }
  p.forward.fusion = Matrix{{0.0, 1.0}};   // last forward state
  p.backward.fusion = Matrix{{0.0, 1.0}};  // last backward state (time 1)
  const std::vector<Vector> m = {Vector{2.0}, Vector{3.0}};
  // forward: 2, 2+3 = 5; backward: 3, 3+2 = 5
  EXPECT_EQ(trnn_forward(p, m).logits[0], 10.0);
  EXPECT_EQ(oracle::trnn_logits(p, plain(m))[0], 10.0);
}

TEST(TrnnForward, MatchesNaiveEvaluator) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto act = seed % 2 ? Activation::relu : Activation::sigmoid;
    const auto p = TrnnParams::random({3, 4, 4, 2, 3}, act, rng);
    const auto m = random_sequence(4, 3, rng);
    const auto o = trnn_forward(p, m).logits;
    const auto ref = oracle::trnn_logits(p, plain(m));
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(o[c], ref[c], 1e-12 * std::max(1.0, std::abs(ref[c])));
  }
}

TEST(TrnnForward, TimeReversalSymmetry) {
  Rng rng(3);
  const auto p = TrnnParams::random({3, 4, 5, 2, 3}, Activation::sigmoid, rng);
  auto m = random_sequence(5, 3, rng);
  const auto a = trnn_forward(p, m).logits;
  TrnnParams swapped = p;
  std::swap(swapped.forward, swapped.backward);
  std::reverse(m.begin(), m.end());
  const auto b = trnn_forward(swapped, m).logits;
  EXPECT_EQ(a, b);
}

TEST(TrnnForward, IdentityProjectionsReduceToLastStateClassifier) {
  Rng rng(4);
  const std::size_t L = 4, H = 3, C = 2;
  auto p = TrnnParams::random({2, H, L, L, C}, Activation::relu, rng);
  Matrix wf(C, H), wb(C, H);
  for (auto* w : {&wf, &wb})
    for (auto& v : w->values()) v = rng.normal();
  for (auto* c : {&p.forward, &p.backward}) {
    c->projection = Matrix::identity(L);
    c->fusion = Matrix(C, H * L);
  }
  for (std::size_t r = 0; r < C; ++r)
    for (std::size_t u = 0; u < H; ++u) {
      p.forward.fusion(r, (L - 1) * H + u) = wf(r, u);
      p.backward.fusion(r, (L - 1) * H + u) = wb(r, u);
    }
  const auto m = random_sequence(L, 2, rng);
  const auto tr = trnn_forward(p, m);
  // Final forward state and the backward state at the first slice.
  Vector expect = matvec(wf, tr.forward_hidden[L - 1]);
  expect += matvec(wb, tr.backward_hidden[L - 1]);
  for (std::size_t r = 0; r < C; ++r) EXPECT_NEAR(tr.logits[r], expect[r], 1e-14);
}

TEST(TrnnBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(5);
  const auto p = TrnnParams::random({3, 4, 3, 2, 3}, Activation::sigmoid, rng);
  const auto m = random_sequence(3, 3, rng);
  const auto tr = trnn_forward(p, m);
  auto grads = TrnnParams::zeros(p.dims(), p.activation);
  const auto gm = trnn_backward(p, m, tr, Vector(3), grads);
  for (double v : flatten(grads).values()) EXPECT_EQ(v, 0.0);
  for (const auto& v : gm) EXPECT_EQ(v, Vector(3));
}

class TrnnGradient : public ::testing::TestWithParam<std::tuple<Activation, int>> {};

TEST_P(TrnnGradient, ParametersAndInputsMatchFiniteDifferences) {
  const auto [act, seed] = GetParam();
  Rng rng(static_cast<std::uint64_t>(seed) + 100);
  const auto p = TrnnParams::random({2, 3, 4, 2, 3}, act, rng);
  const auto m = random_sequence(4, 2, rng);
  Vector c(3);
  for (auto& e : c.values()) e = rng.normal();
  const auto tr = trnn_forward(p, m);
  auto grads = TrnnParams::zeros(p.dims(), act);
  const auto gm = trnn_backward(p, m, tr, c, grads);

  auto check = [](const Vector& ana, const Vector& num) {
    double worst = 0;
    for (std::size_t i = 0; i < ana.size(); ++i)
      worst = std::max(worst, std::abs(ana[i] - num[i]) / std::max({std::abs(ana[i]), std::abs(num[i]), 1e-6}));
    return worst;
  };
  const auto num = finite_diff_grad(
      [&](const Vector& flat) {
        auto q = p;
        assign(q, flat);
        return dot(c.values(), trnn_forward(q, m).logits.values());
      },
      flatten(p), 1e-4);
  EXPECT_LT(check(flatten(grads), num), 1e-4);

  std::vector<double> flat_m;
  for (const auto& v : m) flat_m.insert(flat_m.end(), v.values().begin(), v.values().end());
  const auto num_m = finite_diff_grad(
      [&](const Vector& flat) {
        std::vector<Vector> q(4, Vector(2));
        for (std::size_t i = 0; i < flat.size(); ++i) q[i / 2][i % 2] = flat[i];
        return dot(c.values(), trnn_forward(p, q).logits.values());
      },
      Vector(flat_m), 1e-4);
  std::vector<double> ana_m;
  for (const auto& v : gm) ana_m.insert(ana_m.end(), v.values().begin(), v.values().end());
  EXPECT_LT(check(Vector(ana_m), num_m), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(BothActivations, TrnnGradient,
                         ::testing::Combine(::testing::Values(Activation::relu, Activation::sigmoid),
                                            ::testing::Values(0, 1, 2)));

TEST(TrnnBackward, LastInputGradientUnderForwardOnlyWeights) {
  Rng rng(6);
  const std::size_t L = 3, H = 3, D = 2, P = 2, C = 2;
  auto p = TrnnParams::random({D, H, L, P, C}, Activation::sigmoid, rng);
  p.backward = TrnnParams::zeros(p.dims(), p.activation).backward;
  const auto m = random_sequence(L, D, rng);
  Vector go(C);
  for (auto& e : go.values()) e = rng.normal();
  const auto tr = trnn_forward(p, m);
  auto grads = TrnnParams::zeros(p.dims(), p.activation);
  const auto gm = trnn_backward(p, m, tr, go, grads);

  // dE/dh_L = sum_l G_f[L, l] * (V_f block l)^T go; nothing flows back from later steps.
  Vector gq(H * P);
  matvec_transposed_add(p.forward.fusion, go.values(), gq.values());
  Vector gh(H);
  for (std::size_t l = 0; l < P; ++l)
    for (std::size_t u = 0; u < H; ++u) gh[u] += p.forward.projection(L - 1, l) * gq[l * H + u];
  const auto& h = tr.forward_hidden[L - 1];
  Vector dz(H);
  for (std::size_t u = 0; u < H; ++u) dz[u] = gh[u] * h[u] * (1.0 - h[u]);
  Vector expect(D);
  matvec_transposed_add(p.forward.input_weights, dz.values(), expect.values());
  for (std::size_t k = 0; k < D; ++k) EXPECT_NEAR(gm[L - 1][k], expect[k], 1e-14);
}

TEST(FitLength, PadsAndMasks) {
  const std::vector<Vector> m = {Vector{1.0}, Vector{2.0}};
  const auto [padded, mask] = fit_length(m, 4, 1);
  ASSERT_EQ(padded.size(), 4u);
  EXPECT_EQ(padded[1], Vector{2.0});
  EXPECT_EQ(padded[3], Vector{0.0});
  EXPECT_EQ(mask, (std::vector<bool>{true, true, false, false}));
  const auto [cut, cut_mask] = fit_length(std::vector<Vector>(6, Vector{1.0}), 4, 1);
  EXPECT_EQ(cut.size(), 4u);
  EXPECT_EQ(cut_mask, std::vector<bool>(4, true));
}

TEST(TrnnForward, MaskedStepsDoNotReachTheLogits) {
  Rng rng(7);
  const auto p = TrnnParams::random({2, 3, 4, 2, 2}, Activation::sigmoid, rng);
  const std::vector<Vector> m = {Vector{0.3, -0.2}, Vector{0.5, 0.1}};
  const auto [padded, mask] = fit_length(m, 4, 2);
  auto g = p;
  g.forward.projection(2, 0) = 9.0;
  g.forward.projection(3, 1) = -9.0;
  const auto a = trnn_forward(p, padded, mask).logits;
  const auto b = trnn_forward(g, padded, mask).logits;
  EXPECT_EQ(a, b);
}
