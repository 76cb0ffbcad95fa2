#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "otamm/otamm.hpp"

using namespace otamm;

namespace {

const OtaMacromodel& reference() {
  static const OtaMacromodel m = calibrate_reference(CalibrationTargets{});
  return m;
}

double gm1(const OtaMacromodel& m) { return m.stages[0].gm; }

double a0(const OtaMacromodel& m) {
  double g = 1.0;
  for (const auto& s : m.stages) g *= s.gm * s.Ro;
  return g;
}

}  // namespace

TEST(Sampling, ZeroSigmaCopiesBase) {
  const auto v = sample_models(reference(), SigmaSpec::zero(), 50, 3);
  ASSERT_EQ(v.size(), 50u);
  for (const auto& m : v) EXPECT_EQ(m, reference());
  const auto s = mc_statistics(gm1, v);
  EXPECT_EQ(s.sigma_over_mu, 0.0);
  EXPECT_EQ(s.min, s.max);
}

TEST(Sampling, DeterministicAcrossThreads) {
  const auto a = sample_models(reference(), SigmaSpec{}, 400, 42, 1);
  const auto b = sample_models(reference(), SigmaSpec{}, 400, 42, 4);
  const auto c = sample_models(reference(), SigmaSpec{}, 400, 42, 0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(a[17], sample_model(reference(), SigmaSpec{}, 42, 17));
  EXPECT_NE(a[17], sample_model(reference(), SigmaSpec{}, 43, 17));
  const auto sa = mc_statistics(a0, a, 1);
  const auto sb = mc_statistics(a0, a, 3);
  EXPECT_EQ(sa.mean, sb.mean);
  EXPECT_EQ(sa.sigma_over_mu, sb.sigma_over_mu);
}

TEST(Sampling, SamplesStayPositive) {
  const auto v = sample_models(reference(), SigmaSpec::uniform(0.45), 2000, 5, 2);
  for (const auto& m : v) EXPECT_NO_THROW(validate(m));
}

TEST(Sampling, RejectsBadSigma) {
  EXPECT_THROW(validate(SigmaSpec::uniform(-0.1)), InvalidParameter);
  EXPECT_THROW(sample_models(reference(), SigmaSpec::uniform(std::nan("")), 1, 1), InvalidParameter);
}

TEST(McStatistics, PassThrough) {
  SigmaSpec s = SigmaSpec::zero();
  s.gm = 0.05;
  const auto v = sample_models(reference(), s, 10000, 2024, 0);
  const auto st = mc_statistics(gm1, v, 0);
  EXPECT_EQ(st.n, 10000u);
  EXPECT_NEAR(st.sigma_over_mu, 0.05, 0.0025);
  EXPECT_NEAR(st.mean / gm1(reference()), 1.0, 0.002);
}

TEST(McStatistics, ProductPropagation) {
  SigmaSpec s = SigmaSpec::zero();
  s.gm = s.ro = 0.01;
  const auto v = sample_models(reference(), s, 10000, 9, 0);
  const auto st = mc_statistics(a0, v, 0);
  EXPECT_NEAR(st.sigma_over_mu, std::sqrt(8.0) * 0.01, 0.002);
}

TEST(McStatistics, ConstantAndScaleInvariance) {
  const auto v = sample_models(reference(), SigmaSpec{}, 300, 1);
  EXPECT_EQ(mc_statistics([](const OtaMacromodel&) { return 2.5; }, v).sigma_over_mu, 0.0);
  const auto a = mc_statistics(a0, v);
  const auto b = mc_statistics([](const OtaMacromodel& m) { return 7.0 * a0(m); }, v);
  EXPECT_NEAR(a.sigma_over_mu, b.sigma_over_mu, 1e-12);
}

TEST(McStatistics, PermutationInvariant) {
  auto v = sample_models(reference(), SigmaSpec{}, 300, 1);
  const auto a = mc_statistics(a0, v);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(4));
  const auto b = mc_statistics(a0, v, 2);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.sigma_over_mu, b.sigma_over_mu);
}

TEST(McStatistics, FailuresRecorded) {
  const auto v = sample_models(reference(), SigmaSpec{}, 20, 1);
  std::size_t calls = 0;
  const auto st = mc_statistics(
      [&](const OtaMacromodel& m) {
        if (m == v[3] || m == v[11]) throw NoSolution("forced");
        ++calls;
        return gm1(m);
      },
      v);
  EXPECT_EQ(st.n, 18u);
  EXPECT_EQ(st.failures, (std::vector<std::size_t>{3, 11}));
}

TEST(McStatistics, ExactMetricOnSamples) {
  const auto v = sample_models(reference(), SigmaSpec{}, 40, 8, 2);
  const auto st = mc_statistics(
      [](const OtaMacromodel& m) {
        return stability_metrics_exact(assemble_descriptor(m, LoadCondition(1e-9), false)).gbw_hz;
      },
      v, 2);
  EXPECT_TRUE(st.failures.empty());
  EXPECT_NEAR(st.mean / 192e3, 1.0, 0.05);
  EXPECT_GT(st.sigma_over_mu, 0.0);
}

TEST(Summarize, Basic) {
  const auto s = summarize({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.sigma_over_mu, 0.5);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 3.0);
}
