#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wvtilt/shot_noise_mc.hpp"

using namespace wvtilt;

namespace {

const BeamGeometry lab_beam(1064e-9, 60e-6);

/// Kick giving a target closed-form BHD SNR for N injected photons.
TiltKick kick_for_snr(double snr, double n, const InterferometerSetting& s) {
  const double k = std::sqrt(snr) / (2.0 * std::sqrt(n) * s.cos_half_phi() * lab_beam.waist());
  return TiltKick::from_momentum(k, lab_beam);
}

}  // namespace

// Known-answer vectors published with the reference Random123 implementation.
TEST(Philox, KnownAnswerVectors) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (philox_counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (philox_counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (philox_counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(PhiloxStream, StreamsAreReproducibleAndDistinct) {
  PhiloxStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    EXPECT_EQ(x, b.next_u32());
    differs_c = differs_c || x != c.next_u32();
    differs_d = differs_d || x != d.next_u32();
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_d);
}

TEST(PhiloxStream, UniformAndNormalMoments) {
  PhiloxStream rng(1, 0);
  MomentAccumulator u, z;
  for (int i = 0; i < 400000; ++i) {
    const double x = rng.uniform();
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
    u.add(x);
    z.add(rng.normal());
  }
  EXPECT_NEAR(u.mean, 0.5, 3e-3);
  EXPECT_NEAR(u.m2 / u.n, 1.0 / 12.0, 1e-3);
  EXPECT_NEAR(z.mean, 0.0, 8e-3);
  EXPECT_NEAR(z.m2 / z.n, 1.0, 1e-2);
  EXPECT_NEAR(z.m3 / z.n, 0.0, 2e-2);
  EXPECT_NEAR(z.m4 / z.n, 3.0, 6e-2);
}

TEST(PhiloxStream, PoissonMomentsAcrossRegimes) {
  PhiloxStream rng(5, 9);
  for (double mean : {0.7, 3.0, 9.5, 10.5, 50.0, 1e4, 5e8, 2e9}) {
    MomentAccumulator acc;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double k = rng.poisson(mean);
      ASSERT_EQ(k, std::floor(k));
      ASSERT_GE(k, 0.0);
      acc.add(k);
    }
    const double var = acc.m2 / (acc.n - 1.0);
    EXPECT_NEAR(acc.mean, mean, 5.0 * std::sqrt(mean / n)) << mean;
    EXPECT_NEAR(var / mean, 1.0, 5.0 * std::sqrt(2.0 / n)) << mean;
  }
  EXPECT_EQ(rng.poisson(0.0), 0.0);
}

TEST(PhiloxStream, SmallMeanPoissonPmf) {
  PhiloxStream rng(11, 0);
  const double mean = 2.5;
  const int n = 400000;
  std::vector<int> counts(20, 0);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(rng.poisson(mean));
    if (k < counts.size()) ++counts[k];
  }
  for (int k = 0; k < 8; ++k) {
    const double p = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
    EXPECT_NEAR(counts[k] / double(n), p, 5.0 * std::sqrt(p / n)) << k;
  }
}

TEST(MomentAccumulator, MergeMatchesSequential) {
  PhiloxStream rng(2, 0);
  std::vector<double> xs(10001);
  for (auto& x : xs) x = 3.0 + 2.0 * rng.normal() + rng.uniform() * rng.uniform();
  MomentAccumulator all, left, right;
  for (double x : xs) all.add(x);
  for (std::size_t i = 0; i < 3777; ++i) left.add(xs[i]);
  for (std::size_t i = 3777; i < xs.size(); ++i) right.add(xs[i]);
  left.merge(right);
  EXPECT_EQ(left.n, all.n);
  EXPECT_NEAR(left.mean, all.mean, 1e-13);
  EXPECT_NEAR(left.m2, all.m2, 1e-10 * all.m2);
  EXPECT_NEAR(left.m3, all.m3, 1e-9 * std::abs(all.m2));
  EXPECT_NEAR(left.m4, all.m4, 1e-10 * all.m4);
  // Direct two-pass central moments.
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    m2 += (x - mean) * (x - mean);
    m4 += std::pow(x - mean, 4);
  }
  EXPECT_NEAR(all.m2, m2, 1e-10 * m2);
  EXPECT_NEAR(all.m4, m4, 1e-10 * m4);
  MomentAccumulator empty;
  empty.merge(all);
  EXPECT_EQ(empty.mean, all.mean);
}

TEST(EmpiricalOutcome, DegenerateSampleHasInfiniteError) {
  MomentAccumulator one;
  one.add(1.0);
  const auto out = EmpiricalOutcome::from_moments(one, 0);
  EXPECT_TRUE(std::isinf(out.snr_stderr));
}

TEST(SimulateBhd, UnitSnrAtClosedFormMinimum) {
  const double n = 5.35265e11;
  const auto s = InterferometerSetting::from_postselection_probability(0.033);
  const auto kick = TiltKick::from_tilt(mmt_bhd(n, s, lab_beam), lab_beam);
  const auto budget = PhotonBudget::from_setting(n, s, 1e15);
  const auto out = simulate_bhd({1'000'000, 17}, budget, s, kick, lab_beam);
  EXPECT_EQ(out.trials, 1'000'000u);
  EXPECT_GE(out.snr, 0.99);
  EXPECT_LE(out.snr, 1.01);
  EXPECT_LT(std::abs(out.snr - 1.0), 5.0 * out.snr_stderr);
  EXPECT_NEAR(out.variance, 1.0, 5e-3);
}

TEST(SimulateBhd, DeterministicAcrossWorkerCounts) {
  const auto s = InterferometerSetting(0.5);
  const auto budget = PhotonBudget::from_setting(1e12, s, 1e15);
  const auto kick = kick_for_snr(4.0, 1e12, s);
  McConfig c{300'000, 99};
  c.workers = 1;
  const auto one = simulate_bhd(c, budget, s, kick, lab_beam);
  c.workers = 7;
  const auto seven = simulate_bhd(c, budget, s, kick, lab_beam);
  c.workers = 0;
  const auto any = simulate_bhd(c, budget, s, kick, lab_beam);
  EXPECT_EQ(one.mean, seven.mean);
  EXPECT_EQ(one.variance, seven.variance);
  EXPECT_EQ(one.snr, any.snr);
  c.seed = 100;
  EXPECT_NE(simulate_bhd(c, budget, s, kick, lab_beam).mean, one.mean);
}

TEST(SimulateBhd, StandardErrorIsCalibrated) {
  const auto s = InterferometerSetting(1.0);
  const auto budget = PhotonBudget::from_setting(1e12, s, 1e15);
  const auto kick = kick_for_snr(2.0, 1e12, s);
  MomentAccumulator spread;
  double mean_stderr = 0.0;
  const int runs = 60;
  for (int seed = 0; seed < runs; ++seed) {
    const auto out = simulate_bhd({20'000, std::uint64_t(seed)}, budget, s, kick, lab_beam);
    spread.add(out.snr);
    mean_stderr += out.snr_stderr / runs;
  }
  const double observed = std::sqrt(spread.m2 / (spread.n - 1.0));
  EXPECT_NEAR(observed / mean_stderr, 1.0, 0.3);
  EXPECT_NEAR(spread.mean, 2.0, 4.0 * observed / std::sqrt(double(runs)));
}

TEST(SimulateBhd, SqueezedNoiseVariance) {
  const auto s = InterferometerSetting(0.3);
  const auto budget = PhotonBudget::from_setting(1e12, s, 1e15);
  const auto kick = kick_for_snr(1.0, 1e12, s);
  const auto out = simulate_bhd({200'000, 3}, budget, s, kick, lab_beam, NoiseQuadrature(0.5));
  EXPECT_NEAR(out.variance, 0.5, 0.01);
  EXPECT_NEAR(out.snr, 2.0, 5.0 * out.snr_stderr);
}

TEST(SimulateBhd, PoissonCountingMatchesClosedForm) {
  const auto s = InterferometerSetting::from_postselection_probability(0.01);
  const double n = 1e8;
  const auto budget = PhotonBudget::from_setting(n, s, 1e7);
  const auto kick = kick_for_snr(3.0, n, s);
  McConfig c{400'000, 21, PhotonModel::poisson_counting};
  const auto out = simulate_bhd(c, budget, s, kick, lab_beam);
  const double want = snr_bhd(n, s, kick, lab_beam);
  EXPECT_NEAR(out.snr, want, 5.0 * out.snr_stderr);
  // (a - b) / sqrt(N_LO) has variance (mean_a + mean_b) / N_LO = 1 + N' beta^2 / N_LO.
  EXPECT_NEAR(out.variance, 1.0, 0.01);
  const auto no_lo = PhotonBudget::from_setting(n, s, 0.0);
  EXPECT_THROW(simulate_bhd(c, no_lo, s, kick, lab_beam), validation_error);
}

TEST(SimulateBhd, RejectsInvalidConfig) {
  const auto s = InterferometerSetting(1.0);
  const auto budget = PhotonBudget::from_setting(1e12, s, 1e15);
  EXPECT_THROW(simulate_bhd({0, 1}, budget, s, TiltKick::none(), lab_beam), validation_error);
}

TEST(HalfPlane, OverlapIsRootTwoOverPi) {
  EXPECT_NEAR(half_plane_overlap(lab_beam), std::sqrt(2.0 / std::numbers::pi), 1e-8);
  const double oracle = 2.0 * oracle::integrate_real_line(
                                  [](double x) {
                                    return x > 0 ? oracle::hg_mode(0, x, 60e-6) * oracle::hg_mode(1, x, 60e-6) : 0.0;
                                  },
                                  60e-6);
  EXPECT_NEAR(half_plane_overlap(lab_beam), oracle, 1e-8);
  EXPECT_THROW(half_plane_overlap(lab_beam, 2000), validation_error);
  EXPECT_THROW(half_plane_overlap(lab_beam, 2001, 4.0), grid_too_narrow);
}

TEST(HalfPlane, SplitFractions) {
  const auto even = half_plane_split(0.0, lab_beam);
  EXPECT_NEAR(even.left, 0.5, 1e-12);
  EXPECT_NEAR(even.right, 0.5, 1e-12);
  for (double beta : {1e-4, 0.01, 0.3}) {
    const auto s = half_plane_split(beta, lab_beam);
    EXPECT_NEAR(s.left + s.right, 1.0, 1e-14);
    const double want = 2.0 * beta * std::sqrt(2.0 / std::numbers::pi) / (1.0 + beta * beta);
    EXPECT_NEAR(s.right - s.left, want, 1e-8 * want);
  }
}

TEST(SimulateSd, RecoversTwoOverPi) {
  const auto s = InterferometerSetting::from_postselection_probability(0.033);
  const double n = 1e12;
  const auto budget = PhotonBudget::from_setting(n, s, 1e15);
  const auto kick = kick_for_snr(400.0, n, s);
  McConfig c{1'000'000, 8};
  const auto sd = simulate_sd(c, budget, s, kick, lab_beam);
  const auto bhd = simulate_bhd(c, budget, s, kick, lab_beam);
  const double ratio = sd.snr / bhd.snr;
  const double ratio_err = ratio * std::hypot(sd.snr_stderr / sd.snr, bhd.snr_stderr / bhd.snr);
  EXPECT_NEAR(ratio, 2.0 / std::numbers::pi, 0.02 * 2.0 / std::numbers::pi);
  EXPECT_LT(5.0 * ratio_err, 0.02 * 2.0 / std::numbers::pi);
  EXPECT_NEAR(sd.snr, snr_sd(n, s, kick, lab_beam), 5.0 * sd.snr_stderr);
}

TEST(SimulateSd, PoissonCounting) {
  const auto s = InterferometerSetting::from_postselection_probability(0.05);
  const double n = 2e7;
  const auto budget = PhotonBudget::from_setting(n, s, 1e9);
  const auto kick = kick_for_snr(9.0, n, s);
  const auto out = simulate_sd({400'000, 4, PhotonModel::poisson_counting}, budget, s, kick, lab_beam);
  EXPECT_NEAR(out.snr, snr_sd(n, s, kick, lab_beam), 5.0 * out.snr_stderr);
  EXPECT_NEAR(out.variance, 1.0, 0.01);
}

TEST(SimulateSd, RequiresSignalPhotons) {
  const auto s = InterferometerSetting(1.0);
  PhotonBudget b{1e10, 0.0, 1e12, 1e10, std::nullopt};
  EXPECT_THROW(simulate_sd({1000, 1}, b, s, TiltKick::none(), lab_beam), validation_error);
}

TEST(PhotonModel, Names) {
  EXPECT_EQ(to_string(PhotonModel::gaussian_quadrature), "gaussian");
  EXPECT_EQ(to_string(PhotonModel::poisson_counting), "poisson");
}
