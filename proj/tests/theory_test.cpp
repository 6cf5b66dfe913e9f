#include "qsn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qsn/numeric.hpp"
#include "qsn/rng.hpp"
#include "qsn/tls.hpp"

namespace {

using namespace qsn;

const std::vector<int> kSchedule{0, 4, 12, 24, 48, 64};

// mean and standard error of e^{-dG} over Monte Carlo Gaussian draws
std::pair<double, double> mc_moment(const GaussianRate& r, double d, int n,
                                    uint64_t seed) {
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    RngStream rng(seed, static_cast<uint64_t>(i), 1, Stream::kTheory);
    v[static_cast<size_t>(i)] = std::exp(-d * (r.mu + r.sigma * rng.normal()));
  }
  return {mean(v), stderr_of_mean(v)};
}

TEST(LognormalMomentTest, SigmaZeroIsPureExponential) {
  for (double d : {0.0, 1.0, 24.0, 64.0})
    EXPECT_DOUBLE_EQ(lognormal_moment({0.013, 0.0}, d), std::exp(-0.013 * d));
}

TEST(LognormalMomentTest, KnownValueAndMonteCarloAtDepth24) {
  const GaussianRate r{0.01, 0.02};
  const double v = lognormal_moment(r, 24.0);
  EXPECT_DOUBLE_EQ(v, std::exp(-0.24 + 0.1152));
  EXPECT_NEAR(v, 0.8827, 5e-5);
  const auto [m, se] = mc_moment(r, 24.0, 1000000, 5);
  EXPECT_NEAR(v, m, 4.0 * se);
}

TEST(LognormalMomentTest, DepthOneAlreadyDiffersFromNaiveAverage) {
  const GaussianRate r{0.05, 0.1};
  const double v = lognormal_moment(r, 1.0);
  EXPECT_DOUBLE_EQ(v, std::exp(-r.mu + 0.5 * r.sigma * r.sigma));
  EXPECT_GT(v, std::exp(-r.mu));
  const auto [m, se] = mc_moment(r, 1.0, 1000000, 6);
  EXPECT_NEAR(v, m, 4.0 * se);
}

TEST(LognormalMomentTest, RejectsBadInputs) {
  EXPECT_THROW(lognormal_moment({0.01, -0.1}, 1.0), std::invalid_argument);
  EXPECT_THROW(lognormal_moment({0.01, 0.1}, -1.0), std::invalid_argument);
}

TEST(EffectiveDepthTest, DefaultScheduleValue) {
  EXPECT_DOUBLE_EQ(effective_depth(kSchedule), 388352.0 / 7136.0);
  EXPECT_NEAR(effective_depth(kSchedule), 54.42, 0.01);
}

TEST(EffectiveDepthTest, SingleDepthIsItself) {
  const std::vector<int> s{24};
  EXPECT_DOUBLE_EQ(effective_depth(s), 24.0);
}

TEST(EffectiveDepthTest, RejectsDegenerateSchedules) {
  EXPECT_THROW(effective_depth(std::vector<int>{0, 0}), std::invalid_argument);
  EXPECT_THROW(effective_depth(std::vector<int>{4, -2}), std::invalid_argument);
}

TEST(FittedRateTest, ClosedFormMatchesExplicitLeastSquares) {
  RngStream rng(31, 0, 0, Stream::kTheory);
  for (int trial = 0; trial < 50; ++trial) {
    const GaussianRate r{0.002 + 0.02 * rng.uniform(),
                         0.03 * rng.uniform()};
    std::vector<int> s{0};
    const int nd = 2 + static_cast<int>(rng.below(5));
    for (int j = 0; j < nd; ++j) s.push_back(1 + static_cast<int>(rng.below(64)));
    EXPECT_NEAR(fitted_rate(r, s), fitted_rate_lsq(r, s), 1e-12);
  }
}

TEST(FittedRateTest, DegenerateCases) {
  const std::vector<int> s24{24};
  EXPECT_DOUBLE_EQ(fitted_rate({0.01, 0.0}, kSchedule), 0.01);
  EXPECT_DOUBLE_EQ(fitted_rate({0.01, 0.02}, s24), 0.01 - 0.5 * 0.0004 * 24.0);
}

TEST(QuasiStaticBiasTest, KnownValueAndSigns) {
  const double d_eff = effective_depth(kSchedule);
  EXPECT_NEAR(quasi_static_bias(0.02, 24.0, d_eff), 0.8641, 1e-3);
  EXPECT_DOUBLE_EQ(quasi_static_bias(0.02, 24.0, d_eff),
                   std::exp(0.5 * 0.0004 * 24.0 * (24.0 - d_eff)));
  EXPECT_DOUBLE_EQ(quasi_static_bias(0.05, 30.0, 30.0), 1.0);
  EXPECT_LT(quasi_static_bias(0.02, 24.0, 54.0), 1.0);
  EXPECT_GT(quasi_static_bias(0.02, 64.0, 54.0), 1.0);
}

TEST(AnalyticLearnMitigateTest, EqualsClosedFormBias) {
  for (double sigma : {0.01, 0.02, 0.03}) {
    const GaussianRate r{0.01, sigma};
    const double pipeline = analytic_learn_mitigate(r, kSchedule, 24.0);
    const double closed =
        quasi_static_bias(sigma, 24.0, effective_depth(kSchedule));
    EXPECT_NEAR(pipeline, closed, 1e-12);
  }
}

TEST(AnalyticLearnMitigateTest, DepthMatchedScheduleRemovesTheBias) {
  const std::vector<int> s{24};
  const double pipeline = analytic_learn_mitigate({0.01, 0.03}, s, 24.0);
  EXPECT_NEAR(pipeline, 1.0, 1e-12);
}

TEST(SimulateLearnMitigateTest, MatchesClosedFormWithinMonteCarloError) {
  const GaussianRate r{0.01, 0.02};
  const auto mc = simulate_learn_mitigate(r, kSchedule, 24, 1000000, 7);
  EXPECT_GT(mc.bias_se, 0.0);
  EXPECT_LT(mc.bias_se, 1e-2);
  const double closed =
      quasi_static_bias(r.sigma, 24.0, effective_depth(kSchedule));
  EXPECT_NEAR(mc.bias, closed, 4.0 * mc.bias_se);
}

TEST(SimulateLearnMitigateTest, SingleDepthScheduleSelfNormalizes) {
  const std::vector<int> s{24};
  const auto mc = simulate_learn_mitigate({0.01, 0.03}, s, 24, 20000, 9);
  EXPECT_NEAR(mc.bias, 1.0, 1e-12);
}

TEST(SimulateLearnMitigateTest, RejectsBadBatching) {
  EXPECT_THROW(simulate_learn_mitigate({0.01, 0.02}, kSchedule, 24, 50, 1),
               std::invalid_argument);
}

TEST(JensenTest, MomentDominatesPowerOfMeanOnRandomDistributions) {
  RngStream rng(88, 0, 0, Stream::kTheory);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(12));
    std::vector<double> f(static_cast<size_t>(n)), w(static_cast<size_t>(n));
    double wsum = 0;
    for (int i = 0; i < n; ++i) {
      f[static_cast<size_t>(i)] = 0.5 + 0.5 * rng.uniform();
      w[static_cast<size_t>(i)] = 0.01 + rng.uniform();
      wsum += w[static_cast<size_t>(i)];
    }
    for (auto& x : w) x /= wsum;
    double ef = 0;
    for (int i = 0; i < n; ++i) ef += w[static_cast<size_t>(i)] * f[static_cast<size_t>(i)];
    for (int d = 1; d <= 64; ++d) {
      double efd = 0;
      for (int i = 0; i < n; ++i)
        efd += w[static_cast<size_t>(i)] * std::pow(f[static_cast<size_t>(i)], d);
      EXPECT_GE(efd, std::pow(ef, d) - 1e-15);
    }
  }
}

TEST(AveragedT1SimTest, DegenerateDistributionRecoversT1Exactly) {
  std::vector<double> delays;
  for (int j = 0; j <= 20; ++j) delays.push_back(j * 50e-6);
  const auto res = averaged_t1_sim(500e-6, 0.0, delays, 10, 3);
  EXPECT_NEAR(res.fitted_t1 / 500e-6, 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(res.max_t1, 500e-6);
}

TEST(AveragedT1SimTest, WideSpreadStillFitsNearTheMean) {
  std::vector<double> delays;
  for (int j = 0; j <= 20; ++j) delays.push_back(j * 50e-6);
  const auto res = averaged_t1_sim(500e-6, 150e-6, delays, 1000, 12);
  EXPECT_LT(res.fitted_t1, res.max_t1);
  EXPECT_NEAR(res.fitted_t1 / 500e-6, 1.0, 0.2);
}

TEST(AveragedT1SimTest, StableAcrossSeeds) {
  std::vector<double> delays;
  for (int j = 0; j <= 20; ++j) delays.push_back(j * 50e-6);
  std::vector<double> fits;
  for (uint64_t seed = 0; seed < 20; ++seed)
    fits.push_back(averaged_t1_sim(500e-6, 150e-6, delays, 1000, seed).fitted_t1);
  EXPECT_LT(sample_stdev(fits) / mean(fits), 0.1);
}

TEST(LearningSimTest, EqualT1SamplesGiveZeroDifference) {
  const std::vector<double> t1(64, 80e-6);
  const std::vector<int> depths{0, 8, 24, 48, 96, 128};
  const auto res = quasi_static_learning_sim(t1, 0.2e-6, depths);
  EXPECT_LT(res.rel_diff, 1e-12);
  EXPECT_NEAR(res.f_fit, res.f_markov, 1e-12);
}

TEST(LearningSimTest, LandscapeSpreadStaysWithinTwoPercent) {
  // T1 samples from a swept defect landscape, moderate relative spread
  std::vector<QubitEnvironment> qs(1);
  qs[0].base_t1 = 100e-6;
  qs[0].defects.push_back({0.0, 0.0, 0.3, 1.5e4});
  TlsLandscape land(std::move(qs), DriftParams{});
  std::vector<double> t1;
  for (double k : default_k_grid()) t1.push_back(land.t1_at(0, k));

  const double cv = sample_stdev(t1) / mean(t1);
  ASSERT_LE(cv, 0.5);

  const std::vector<int> depths{0, 8, 24, 48, 96, 128};
  const auto res = quasi_static_learning_sim(t1, 0.2e-6, depths);
  EXPECT_LT(res.rel_diff, 0.02);
  // convexity pushes every quasi-static point above the Markov curve
  for (size_t j = 0; j < res.quasi_curve.size(); ++j)
    EXPECT_GE(res.quasi_curve[j], res.markov_curve[j] - 1e-15);
}

TEST(MitsimTest, DegenerateDistributionsGiveZeroDeviation) {
  std::vector<std::vector<double>> dists(6);
  for (int q = 0; q < 6; ++q)
    dists[static_cast<size_t>(q)].assign(32, 80e-6 + 10e-6 * q);
  const auto res = mitsim(dists, kSchedule);
  for (double d : res.deviations) EXPECT_NEAR(d, 0.0, 1e-12);
}

TEST(MitsimTest, GaussianRatesMatchClosedFormBias) {
  // per-layer rate G_q ~ N(mu, sigma) encoded as T1 = tau/G; the product
  // observable then carries a Gaussian total rate and the closed form applies
  const double tau = 135e-9;
  const double mu = tau / 100e-6;
  const double sigma = 0.7 * mu;
  const int ns = 400000;
  std::vector<std::vector<double>> dists(
      6, std::vector<double>(static_cast<size_t>(ns)));
  for (int q = 0; q < 6; ++q) {
    for (int i = 0; i < ns; ++i) {
      RngStream rng(17, static_cast<uint64_t>(i), static_cast<uint32_t>(q),
                    Stream::kTheory);
      dists[static_cast<size_t>(q)][static_cast<size_t>(i)] =
          tau / (mu + sigma * rng.normal());
    }
  }
  const auto res = mitsim(dists, kSchedule, tau, 24);
  const double sigma_total = std::sqrt(6.0) * sigma;
  const double closed =
      quasi_static_bias(sigma_total, 24.0, effective_depth(kSchedule));
  EXPECT_NEAR(res.mean_deviation, closed - 1.0, 1e-3);
  // paper-scale spreads put the bias in the 1e-3..1e-2 decade
  EXPECT_GT(std::abs(res.mean_deviation), 1e-3);
  EXPECT_LT(std::abs(res.mean_deviation), 1e-2);
}

TEST(MitsimTest, RejectsMismatchedInputs) {
  std::vector<std::vector<double>> five(5, std::vector<double>(4, 1e-4));
  EXPECT_THROW(mitsim(five, kSchedule), std::invalid_argument);
  std::vector<std::vector<double>> ragged(6, std::vector<double>(4, 1e-4));
  ragged[3].pop_back();
  EXPECT_THROW(mitsim(ragged, kSchedule), std::invalid_argument);
}

TEST(PerturbationTest, HalvingDeltaQuartersTheDeviation) {
  const double d1 = perturbation_deviation(0.98, 0.97, 0.01, 24);
  const double d2 = perturbation_deviation(0.98, 0.97, 0.005, 24);
  EXPECT_GT(d1, 0.0);
  const double ratio = d1 / d2;
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(PerturbationTest, ZeroDeltaGivesZeroDeviation) {
  EXPECT_DOUBLE_EQ(perturbation_deviation(0.98, 0.97, 0.0, 24), 0.0);
  EXPECT_THROW(perturbation_deviation(0.5, 0.5, 0.6, 4), std::invalid_argument);
}

}  // namespace
