#include <gtest/gtest.h>

#include <cmath>

#include "bindlab/bindlab.hpp"
#include "oracles.hpp"

using namespace bindlab;

namespace {

MixtureParameters random_params(int n, Rng& rng) {
  auto p = MixtureParameters::initial(n);
  p.w_pos = 1 + 6 * rng.uniform01();
  p.alpha = 4 * rng.uniform01() - 2;
  p.beta = 4 * rng.uniform01() - 2;
  p.gamma = 2.5 + rng.uniform01();
  for (auto& w : p.w_lex) w = 8 * rng.uniform01() - 4;
  for (auto& w : p.w_ref) w = 8 * rng.uniform01() - 4;
  return p;
}

}  // namespace

TEST(Sigma, QuadraticAndFloor) {
  auto p = MixtureParameters::initial(20);
  for (int i = 1; i <= 20; ++i) EXPECT_DOUBLE_EQ(sigma(p, i), 1.0);
  p.alpha = 2;
  p.beta = -2;
  p.gamma = 1;
  EXPECT_NEAR(sigma(p, 10), 0.5, 1e-15);
  p.alpha = p.beta = 0;
  p.gamma = -1;
  EXPECT_DOUBLE_EQ(sigma(p, 3), kSigmaFloor);
  EXPECT_TRUE(sigma_clamped(p, 3));
}

TEST(MixtureLogits, WorkedExampleAgainstBoostPdf) {
  auto p = MixtureParameters::initial(4);
  p.w_lex[0] = 2;
  p.w_ref[2] = 3;
  const auto y = mixture_logits(p, build_variant("M"), {2, 1, 3});
  const std::vector<double> expected{2.24197, 0.39894, 3.24197, 0.05399};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(y[i], expected[i], 1e-5);
    const double pdf = static_cast<double>(oracle::normal_pdf(i + 1, 2, 1));
    const double bump = (i == 0 ? 2.0 : 0.0) + (i == 2 ? 3.0 : 0.0);
    EXPECT_NEAR(y[i], pdf + bump, 1e-15);
  }
  // Softmax against 50-digit arithmetic.
  const auto probs = predict_distribution(p, build_variant("M"), {2, 1, 3});
  const auto ref = oracle::softmax(std::vector<oracle::hp>(y.begin(), y.end()));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(probs[i], static_cast<double>(ref[i]), 1e-12);
}

TEST(MixtureLogits, ZeroWeightsGiveUniform) {
  auto p = MixtureParameters::initial(7);
  p.w_pos = 0;
  const auto y = mixture_logits(p, build_variant("M"), {3, 1, 6});
  for (double v : y) EXPECT_EQ(v, 0.0);
  for (double v : predict_distribution(p, build_variant("M"), {3, 1, 6})) EXPECT_NEAR(v, 1.0 / 7, 1e-15);
}

TEST(MixtureLogits, OneHotAndPrevailing) {
  auto p = MixtureParameters::initial(9);
  p.w_pos = 10;
  const auto y = mixture_logits(p, build_variant("M-onehotP"), {4, 1, 2});
  EXPECT_EQ(std::max_element(y.begin(), y.end()) - y.begin(), 3);
  p.w_pos = 50;
  const auto q = predict_distribution(p, build_variant("prevailing"), {4, 1, 2});
  EXPECT_NEAR(q[3], 1.0, 1e-9);
}

TEST(MixtureLogits, OracleNeedsTableAndUsesLogSpace) {
  const int n = 3;
  auto p = MixtureParameters::initial(n);
  auto v = build_variant("M-oracleP");
  EXPECT_THROW(v.validate(n), ConfigurationError);
  EXPECT_THROW(mixture_logits(p, v, {1, 2, 3}), ConfigurationError);
  v.oracle_table = DistributionTable{{0.5, 0.25, 0.25}, {0.0, 1.0, 0.0}, {0.2, 0.3, 0.5}};
  const auto y = mixture_logits(p, v, {2, 1, 3});
  EXPECT_NEAR(y[1], 0.0, 1e-15);
  EXPECT_NEAR(y[0], std::log(kOracleProbFloor), 1e-9);
  // With no other terms, log-space oracle reproduces the row after softmax.
  p.w_lex.assign(n, 0);
  p.w_ref.assign(n, 0);
  const auto probs = predict_distribution(p, v, {3, 1, 2});
  EXPECT_NEAR(probs[0], 0.2, 1e-12);
  EXPECT_NEAR(probs[2], 0.5, 1e-12);
  v.oracle_space = OracleSpace::Probability;
  p.w_pos = 2;
  const auto yp = mixture_logits(p, v, {3, 1, 2});
  EXPECT_NEAR(yp[2], 1.0, 1e-15);
}

TEST(BuildVariant, Table) {
  const auto ml = build_variant("M\\L");
  EXPECT_EQ(ml.positional, PositionalForm::Gaussian);
  EXPECT_FALSE(ml.lexical_on);
  EXPECT_TRUE(ml.reflexive_on);
  const auto u = build_variant("uniform");
  EXPECT_EQ(u.positional, PositionalForm::Absent);
  EXPECT_FALSE(u.lexical_on || u.reflexive_on);
  EXPECT_FALSE(u.trains_anything());
  for (const auto& name : variant_names()) EXPECT_EQ(build_variant(name).name, name);
  EXPECT_THROW(build_variant("M\\Q"), ConfigurationError);
}

TEST(MixtureProperties, Additivity) {
  Rng rng(17);
  const int n = 11;
  const auto full = build_variant("M");
  const auto pos_only = build_variant("M\\LR");
  const auto lex_only = build_variant("M\\PR");
  const auto ref_only = build_variant("M\\PL");
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_params(n, rng);
    const MechanismIndices ix{rng.between(1, n), rng.between(1, n), rng.between(1, n)};
    const auto y = mixture_logits(p, full, ix);
    const auto a = mixture_logits(p, pos_only, ix);
    const auto b = mixture_logits(p, lex_only, ix);
    const auto c = mixture_logits(p, ref_only, ix);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(y[i], a[i] + b[i] + c[i], 1e-12);
    if (ix.i_p == ix.i_l) {
      EXPECT_NEAR(y[ix.i_p - 1] - c[ix.i_p - 1], a[ix.i_p - 1] + p.w_lex[ix.i_l - 1], 1e-12);
    }
  }
}

TEST(MixtureProperties, ShiftingLexicalMovesOneBump) {
  Rng rng(3);
  const int n = 9;
  const auto v = build_variant("M");
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_params(n, rng);
    const int ip = rng.between(1, n), il = rng.between(1, n), ir = rng.between(1, n);
    const int il2 = rng.between(1, n);
    const auto a = mixture_logits(p, v, {ip, il, ir});
    const auto b = mixture_logits(p, v, {ip, il2, ir});
    for (int i = 1; i <= n; ++i) {
      const double expected = (i == il ? -p.w_lex[il - 1] : 0.0) + (i == il2 ? p.w_lex[il2 - 1] : 0.0);
      EXPECT_NEAR(b[i - 1] - a[i - 1], expected, 1e-12);
    }
    const int ir2 = rng.between(1, n);
    const auto c = mixture_logits(p, v, {ip, il, ir2});
    for (int i = 1; i <= n; ++i) {
      const double expected = (i == ir ? -p.w_ref[ir - 1] : 0.0) + (i == ir2 ? p.w_ref[ir2 - 1] : 0.0);
      EXPECT_NEAR(c[i - 1] - a[i - 1], expected, 1e-12);
    }
  }
}

TEST(MixtureProperties, GaussianSymmetry) {
  Rng rng(5);
  const int n = 20;
  const auto v = build_variant("M\\LR");
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_params(n, rng);
    const int ip = rng.between(1, n);
    const auto y = positional_logits(p, v, ip);
    for (int d = 1; ip + d <= n && ip - d >= 1; ++d) EXPECT_NEAR(y[ip + d - 1], y[ip - d - 1], 1e-15);
  }
}

TEST(MixtureProperties, SoftmaxMatchesOracleAndSumsToOne) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.between(2, 20);
    const auto p = random_params(n, rng);
    const MechanismIndices ix{rng.between(1, n), rng.between(1, n), rng.between(1, n)};
    const auto y = mixture_logits(p, build_variant("M"), ix);
    const auto q = softmax(y);
    double total = 0;
    for (double v : q) total += v;
    EXPECT_NEAR(total, 1.0, 1e-9);
    const auto ref = oracle::softmax(std::vector<oracle::hp>(y.begin(), y.end()));
    for (int i = 0; i < n; ++i) EXPECT_NEAR(q[i], static_cast<double>(ref[i]), 1e-12);
  }
}

TEST(MixtureParameters, FlattenRoundTripAndValidation) {
  Rng rng(1);
  const auto p = random_params(6, rng);
  const auto flat = p.flatten();
  ASSERT_EQ(flat.size(), 16u);
  const auto q = MixtureParameters::unflatten(6, flat);
  EXPECT_EQ(q.flatten(), flat);
  auto bad = p;
  bad.w_lex.pop_back();
  EXPECT_THROW(bad.validate(), ConfigurationError);
  bad = p;
  bad.alpha = std::nan("");
  EXPECT_THROW(bad.validate(), ConfigurationError);
  EXPECT_THROW(mixture_logits(p, build_variant("M"), {0, 1, 1}), IndexError);
}
