#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "tcft/errors.hpp"
#include "tcft/layers.hpp"
#include "tcft/ops.hpp"

using namespace tcft;
using tcft::testing::check_gradients;
using tcft::testing::projection_loss;
using tcft::testing::random_tensor;
using tcft::testing::randomize;

namespace {

std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

CausalConv1d single_tap(std::size_t k, std::size_t d, std::size_t tap) {
  CausalConv1d conv(1, 1, k, d);
  conv.weight.mutable_values()[tap] = 1.0;
  return conv;
}

ParameterList lstm_leaves(const LstmParams& p, const std::string& prefix = "lstm") {
  ParameterList out;
  p.collect(prefix, out);
  return out;
}

// Row t of a [T x n] tensor.
std::vector<double> row(const Tensor& t, std::size_t r) {
  const std::size_t n = t.cols();
  return {t.values().begin() + r * n, t.values().begin() + (r + 1) * n};
}

}  // namespace

TEST(CausalConv, IdentityTapReproducesInput) {
  auto x = Tensor::from({1, 4}, {1, 2, 3, 4});
  EXPECT_EQ(vec(causal_conv1d(x, single_tap(3, 1, 0))), vec(x));
}

TEST(CausalConv, LastTapIsPureDelay) {
  auto x = Tensor::from({1, 4}, {1, 2, 3, 4});
  EXPECT_EQ(vec(causal_conv1d(x, single_tap(3, 1, 2))), (std::vector<double>{0, 0, 1, 2}));
  // With dilation 2, tap 1 looks back two steps.
  EXPECT_EQ(vec(causal_conv1d(x, single_tap(3, 2, 1))), (std::vector<double>{0, 0, 1, 2}));
}

TEST(CausalConv, ChannelMismatchIsDimensionError) {
  CausalConv1d conv(3, 2, 3, 1);
  EXPECT_THROW(causal_conv1d(Tensor::zeros({2, 5}), conv), DimensionError);
}

TEST(CausalConv, PerturbingTheFutureNeverChangesThePast) {
  Rng rng(11);
  CausalConv1d conv(2, 3, 3, 4);
  ParameterList params;
  conv.collect("c", params);
  randomize(params, rng, 1.0);
  const std::size_t T = 20;
  auto x = random_tensor({2, T}, rng, 1.0, false);
  const auto base = vec(causal_conv1d(x, conv));
  for (std::size_t t = 0; t + 1 < T; ++t) {
    auto probe = Tensor::from(x.shape(), vec(x));
    for (std::size_t c = 0; c < 2; ++c) probe.mutable_values()[c * T + t + 1] += 1.0;
    const auto y = vec(causal_conv1d(probe, conv));
    for (std::size_t f = 0; f < 3; ++f)
      for (std::size_t s = 0; s <= t; ++s) EXPECT_EQ(y[f * T + s], base[f * T + s]);
  }
}

TEST(CausalConv, GradientMatchesFiniteDifferences) {
  Rng rng(12);
  CausalConv1d conv(3, 4, 3, 2);
  ParameterList leaves;
  conv.collect("conv", leaves);
  randomize(leaves, rng);
  SequenceBatch x{random_tensor({2 * 9, 3}, rng), 2, 9};
  leaves.push_back({"x", x.data});
  auto r = check_gradients([&] { return projection_loss(conv.forward(x).data); }, leaves);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
}

TEST(Residual, ZeroBranchPassesNonNegativeInput) {
  SequenceBatch x{Tensor::from({3, 2}, {0, 1, 2, 3, 4, 5}), 1, 3};
  SequenceBatch zero{Tensor::zeros({3, 2}), 1, 3};
  EXPECT_EQ(vec(tcn_residual(x, zero).data), vec(x.data));
  SequenceBatch neg{scale(x.data, -1.0), 1, 3};
  const auto cancelled = tcn_residual(x, neg);
  for (double v : cancelled.data.values()) EXPECT_EQ(v, 0.0);
}

TEST(Residual, TimeLengthMismatchIsDimensionError) {
  SequenceBatch a{Tensor::zeros({3, 2}), 1, 3};
  SequenceBatch b{Tensor::zeros({4, 2}), 1, 4};
  EXPECT_THROW(tcn_residual(a, b), DimensionError);
}

TEST(Residual, GradientThroughSkipAndProjection) {
  Rng rng(13);
  SequenceBatch x{random_tensor({6, 3}, rng), 2, 3};
  SequenceBatch y{random_tensor({6, 3}, rng), 2, 3};
  auto r = check_gradients([&] { return projection_loss(tcn_residual(x, y).data); },
                           {{"x", x.data}, {"y", y.data}});
  EXPECT_LT(r.max_relative_error, 1e-5) << r.worst;

  Dense proj(3, 5);
  ParameterList leaves;
  proj.collect("proj", leaves);
  randomize(leaves, rng);
  SequenceBatch y5{random_tensor({6, 5}, rng), 2, 3};
  leaves.push_back({"x", x.data});
  leaves.push_back({"y", y5.data});
  auto rp = check_gradients([&] { return projection_loss(tcn_residual(x, y5, &proj).data); },
                            leaves);
  EXPECT_LT(rp.max_relative_error, 1e-5) << rp.worst;
}

TEST(Tcn, ReceptiveFieldIsSixtyThreeForDoublingDilations) {
  TcnBlock tcn(2, 4, 3, {1, 2, 4, 8, 16});
  EXPECT_EQ(tcn.receptive_field(), 63u);
  ASSERT_TRUE(tcn.projection.has_value());
  EXPECT_EQ(tcn.layers.size(), 5u);
}

TEST(Lstm, ZeroWeightsHalveTheCell) {
  LstmParams p(2, 3);
  LstmState prev{Tensor::zeros({1, 3}), Tensor::from({1, 3}, {1.0, -2.0, 0.5})};
  auto next = lstm_step(Tensor::from({1, 2}, {0.3, -0.7}), prev, p);
  for (std::size_t j = 0; j < 3; ++j) {
    const double c = prev.c.at(j);
    EXPECT_DOUBLE_EQ(next.c.at(j), 0.5 * c);
    EXPECT_DOUBLE_EQ(next.h.at(j), 0.5 * std::tanh(0.5 * c));
  }
}

TEST(Lstm, UnitWeightsWithZeroInputGiveZeroHidden) {
  LstmParams p(1, 1);
  for (auto& nt : lstm_leaves(p)) {
    Tensor t = nt.tensor;
    if (nt.name.find(".b_") == std::string::npos) t.mutable_values()[0] = 1.0;
  }
  auto next = lstm_step(Tensor::zeros({1, 1}), {Tensor::zeros({1, 1}), Tensor::zeros({1, 1})}, p);
  EXPECT_EQ(next.h.item(), 0.0);
  EXPECT_EQ(next.c.item(), 0.0);
}

TEST(Lstm, StepRejectsMismatchedInput) {
  LstmParams p(2, 3);
  EXPECT_THROW(lstm_step(Tensor::zeros({1, 4}), {Tensor::zeros({1, 3}), Tensor::zeros({1, 3})}, p),
               DimensionError);
}

TEST(Lstm, FiveStepUnrollGradientCoversAllTwelveTensors) {
  Rng rng(14);
  LstmParams p(3, 4);
  auto leaves = lstm_leaves(p);
  ASSERT_EQ(leaves.size(), 12u);
  randomize(leaves, rng);
  std::vector<Tensor> xs;
  for (int t = 0; t < 5; ++t) xs.push_back(random_tensor({2, 3}, rng, 1.0, false));
  auto loss = [&] {
    LstmState s{Tensor::zeros({2, 4}), Tensor::zeros({2, 4})};
    for (const auto& x : xs) s = lstm_step(x, s, p);
    return sum(s.h);
  };
  auto r = check_gradients(loss, leaves);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
}

TEST(BiLstm, SingleStepConcatenatesTwoSteps) {
  Rng rng(15);
  LstmParams fwd(2, 3), bwd(2, 3);
  randomize(lstm_leaves(fwd), rng);
  randomize(lstm_leaves(bwd), rng);
  auto x = random_tensor({1, 2}, rng, 1.0, false);
  auto out = bilstm_forward(x, fwd, bwd);
  ASSERT_EQ(out.shape(), (Shape{1, 6}));
  const LstmState zero{Tensor::zeros({1, 3}), Tensor::zeros({1, 3})};
  auto f = vec(lstm_step(x, zero, fwd).h);
  auto b = vec(lstm_step(x, zero, bwd).h);
  f.insert(f.end(), b.begin(), b.end());
  EXPECT_EQ(vec(out), f);
}

TEST(BiLstm, ReversingInputAndSwappingRolesMirrorsOutput) {
  Rng rng(16);
  LstmParams fwd(2, 3), bwd(2, 3);
  randomize(lstm_leaves(fwd), rng);
  randomize(lstm_leaves(bwd), rng);
  const std::size_t T = 6;
  auto x = random_tensor({T, 2}, rng, 1.0, false);
  std::vector<std::ptrdiff_t> rev;
  for (std::size_t t = T; t-- > 0;) rev.push_back(static_cast<std::ptrdiff_t>(t));
  auto a = bilstm_forward(x, fwd, bwd);
  auto b = bilstm_forward(gather_rows(x, rev), bwd, fwd);
  for (std::size_t t = 0; t < T; ++t) {
    auto ra = row(a, t), rb = row(b, T - 1 - t);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(ra[j], rb[3 + j], 1e-14);
      EXPECT_NEAR(ra[3 + j], rb[j], 1e-14);
    }
  }
}

TEST(BiLstm, PalindromeWithSharedWeightsIsSymmetric) {
  Rng rng(17);
  LstmParams p(2, 3);
  randomize(lstm_leaves(p), rng);
  const std::size_t T = 7;
  auto half = random_tensor({T, 2}, rng, 1.0, false);
  std::vector<double> v(T * 2);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < 2; ++c)
      v[t * 2 + c] = half.at(std::min(t, T - 1 - t) * 2 + c);
  auto out = bilstm_forward(Tensor::from({T, 2}, v), p, p);
  ASSERT_EQ(out.cols(), 6u);
  for (std::size_t t = 0; t < T; ++t) {
    auto r = row(out, t), m = row(out, T - 1 - t);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(r[j], m[3 + j], 1e-14);
  }
}

TEST(BiLstm, GradientMatchesFiniteDifferences) {
  Rng rng(18);
  LstmParams fwd(3, 2), bwd(3, 2);
  auto leaves = lstm_leaves(fwd, "fwd");
  bwd.collect("bwd", leaves);
  randomize(leaves, rng);
  SequenceBatch x{random_tensor({2 * 5, 3}, rng), 2, 5};
  leaves.push_back({"x", x.data});
  auto r = check_gradients([&] { return projection_loss(bilstm_forward(x, fwd, bwd).data); },
                           leaves);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
}

TEST(GatedOutput, Examples) {
  Rng rng(19);
  auto x = random_tensor({3, 6}, rng, 1.0, false);
  auto half = gated_output(x, Tensor::zeros({6, 6}));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(half.at(i), 0.5 * x.at(i));
  const auto zero = gated_output(Tensor::zeros({3, 6}), random_tensor({6, 6}, rng));
  for (double v : zero.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(gated_output(x, Tensor::zeros({5, 6})), DimensionError);
}

TEST(GatedOutput, GradientMatchesFiniteDifferences) {
  Rng rng(20);
  auto x = random_tensor({3, 6}, rng);
  auto w = random_tensor({6, 6}, rng);
  auto r = check_gradients([&] { return projection_loss(gated_output(x, w)); },
                           {{"x", x}, {"W_g", w}});
  EXPECT_LT(r.max_relative_error, 1e-5) << r.worst;
}

TEST(Dense, ParameterCountsAndShape) {
  Dense d(4, 3);
  ParameterList p;
  d.collect("fc", p);
  EXPECT_EQ(parameter_count(p), 15u);
  EXPECT_EQ(d.forward(Tensor::zeros({2, 4})).shape(), (Shape{2, 3}));
}
