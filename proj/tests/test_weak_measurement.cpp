#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wvtilt/weak_measurement.hpp"

using namespace wvtilt;

namespace {

const BeamGeometry lab_beam(1064e-9, 60e-6);

TiltKick kick_for(double k_w0) { return TiltKick::from_momentum(k_w0 / lab_beam.waist(), lab_beam); }

double cot_half(double phi) { return 1.0 / std::tan(0.5 * phi); }

/// |c1/c0| of the exact dark-port field by independent quadrature.
double oracle_ratio(double phi, double k_w0) {
  const double w = lab_beam.waist();
  const double k = k_w0 / w;
  const auto field = [&](double x) { return std::sin(0.5 * phi + k * x) * oracle::hg_mode(0, x, w); };
  const double c0 = oracle::integrate_real_line([&](double x) { return field(x) * oracle::hg_mode(0, x, w); }, w);
  const double c1 = oracle::integrate_real_line([&](double x) { return field(x) * oracle::hg_mode(1, x, w); }, w);
  return std::abs(c1 / c0);
}

}  // namespace

TEST(InterferometerSetting, RejectsOutOfRangePhase) {
  EXPECT_THROW(InterferometerSetting(0.0), validation_error);
  EXPECT_THROW(InterferometerSetting(-0.1), validation_error);
  EXPECT_THROW(InterferometerSetting(3.2), validation_error);
  EXPECT_THROW(InterferometerSetting(std::nan("")), validation_error);
  EXPECT_NO_THROW(InterferometerSetting(std::numbers::pi));
  EXPECT_THROW(InterferometerSetting::from_postselection_probability(0.0), validation_error);
  EXPECT_THROW(InterferometerSetting::from_postselection_probability(1.01), validation_error);
}

TEST(InterferometerSetting, InverseFromOutputOverInput) {
  const auto s = InterferometerSetting::from_postselection_probability(55.0 / 70.0);
  EXPECT_NEAR(s.phi(), 2.0 * std::asin(std::sqrt(55.0 / 70.0)), 1e-15);
  EXPECT_NEAR(s.phi(), 2.179, 5e-4);
  EXPECT_NEAR(s.postselection_probability(), 55.0 / 70.0, 1e-15);
}

TEST(TiltKick, MomentumAndTiltAreConsistent) {
  const auto a = TiltKick::from_tilt(3.8e-9, lab_beam);
  EXPECT_NEAR(a.k(), 2.0 * std::numbers::pi * 3.8e-9 / 1064e-9, 1e-12 * a.k());
  const auto b = TiltKick::from_momentum(a.k(), lab_beam);
  EXPECT_NEAR(b.theta(), 3.8e-9, 1e-12 * 3.8e-9);
  EXPECT_EQ(TiltKick::none().k(), 0.0);
  EXPECT_EQ(WeakInteraction::from_kick(a).coupling, a.k());
}

TEST(Preselect, BrightSettingAmplitudes) {
  const auto i = preselect(InterferometerSetting(std::numbers::pi));
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(i.plus.real(), 0.0, 1e-15);
  EXPECT_NEAR(i.plus.imag(), -r, 1e-15);
  EXPECT_NEAR(i.minus.real(), 0.0, 1e-15);
  EXPECT_NEAR(i.minus.imag(), r, 1e-15);
}

TEST(Preselect, AlwaysNormalized) {
  for (double phi : {1e-6, 0.02, 0.3636, 1.0, 2.179, std::numbers::pi})
    EXPECT_NEAR(preselect(InterferometerSetting(phi)).norm_squared(), 1.0, 1e-12);
}

TEST(WeakValue, MatchesStateDefinition) {
  const auto f = postselected_state();
  for (double phi : {0.02, 0.3636, 1.0, 2.5, std::numbers::pi}) {
    const auto s = InterferometerSetting(phi);
    const auto i = preselect(s);
    const complex from_states = f.inner(i.apply_path_operator()) / f.inner(i);
    const complex aw = weak_value(s);
    EXPECT_NEAR(aw.real(), from_states.real(), 1e-12 * (1.0 + std::abs(aw)));
    EXPECT_NEAR(aw.imag(), from_states.imag(), 1e-12 * (1.0 + std::abs(aw)));
    EXPECT_LE(std::abs(aw.real()), 1e-14 * std::abs(aw));
    EXPECT_NEAR(std::norm(f.inner(i)), postselection_probability(s), 1e-14);
  }
}

TEST(WeakValue, ReferenceSettings) {
  EXPECT_NEAR(std::abs(weak_value(InterferometerSetting(std::numbers::pi))), 0.0, 1e-15);
  EXPECT_NEAR(weak_value(InterferometerSetting(std::numbers::pi / 2)).imag(), 1.0, 1e-15);
  const complex aw = weak_value(InterferometerSetting(0.02));
  EXPECT_NEAR(aw.imag(), 99.997, 5e-4);
  EXPECT_NEAR(aw.imag(), 2.0 / 0.02, 0.01);
}

TEST(WeakValue, PhaseFloor) {
  EXPECT_THROW(weak_value(InterferometerSetting(5e-10)), singular_phase);
  EXPECT_NO_THROW(weak_value(InterferometerSetting(5e-10), 1e-12));
  EXPECT_THROW(weak_value(InterferometerSetting(0.01), 0.02), singular_phase);
}

TEST(PostselectionProbability, ReferenceSettings) {
  EXPECT_NEAR(postselection_probability(InterferometerSetting(std::numbers::pi)), 1.0, 1e-15);
  EXPECT_NEAR(postselection_probability(InterferometerSetting(0.3636)), 0.0327, 5e-5);
  EXPECT_NEAR(postselection_probability(InterferometerSetting(2.0 * std::asin(std::sqrt(0.033)))), 0.033, 1e-15);
}

TEST(DarkPortField, NoKickGivesFundamentalMode) {
  for (double phi : {0.05, 0.3636, 1.7, 3.0}) {
    const auto s = InterferometerSetting(phi);
    const auto dark = dark_port_field(s, TiltKick::none(), lab_beam);
    EXPECT_NEAR(dark.probability, postselection_probability(s), 1e-10);
    const auto dec = decompose_field(dark.field, 3, lab_beam);
    EXPECT_NEAR(std::abs(dec.coefficients[0]), 1.0, 1e-10);
    for (int n = 1; n <= 3; ++n) EXPECT_LT(std::abs(dec.coefficients[n]), 1e-10);
  }
}

TEST(DarkPortField, TableOneSettingRatio) {
  const double phi = 0.3636;
  const auto dark = dark_port_field(InterferometerSetting(phi), kick_for(1e-3), lab_beam);
  const auto dec = decompose_field(dark.field, 1, lab_beam);
  const double ratio = std::abs(dec.coefficients[1] / dec.coefficients[0]);
  const double first_order = cot_half(phi) * 1e-3 / 2;
  EXPECT_NEAR(ratio, first_order, 1e-3 * first_order);
  EXPECT_NEAR(ratio, oracle_ratio(phi, 1e-3), 1e-6 * first_order);
  EXPECT_NEAR(ratio, 2.716e-3, 3e-3 * 2.716e-3);
}

TEST(DarkPortField, ProbabilityGrowsAsKSquared) {
  // |<x|E>|^2 integrates to sin^2(phi/2) + cos(phi) (1 - e^{-k^2 w^2/2}) / 2.
  const double phi = 0.3;
  for (double kw : {1e-3, 1e-2, 0.1}) {
    const auto dark = dark_port_field(InterferometerSetting(phi), kick_for(kw), lab_beam);
    const double exact = std::pow(std::sin(phi / 2), 2) + 0.5 * std::cos(phi) * (1.0 - std::exp(-kw * kw / 2));
    EXPECT_NEAR(dark.probability, exact, 1e-10);
  }
}

TEST(DarkPortField, RejectsNarrowGrid) {
  EXPECT_THROW(dark_port_field(InterferometerSetting(1.0), kick_for(1e-3), lab_beam, uniform_grid(1e-4, 401)),
               grid_too_narrow);
}

TEST(DarkPortField, DestructiveInterferenceRaisesFirstModeWeight) {
  double previous = 0.0;
  for (double phi : {3.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.05}) {
    const auto dec = decompose_field(dark_port_field(InterferometerSetting(phi), kick_for(1e-3), lab_beam).field, 1, lab_beam);
    const double ratio = std::abs(dec.coefficients[1] / dec.coefficients[0]);
    EXPECT_GT(ratio, previous) << phi;
    previous = ratio;
  }
}

TEST(PointerFirstOrder, ReferenceCoefficients) {
  const auto none = pointer_firstorder(InterferometerSetting(1.0), TiltKick::none(), lab_beam);
  EXPECT_NEAR(std::abs(none.coefficients[0]), 1.0, 1e-15);
  EXPECT_EQ(std::abs(none.coefficients[1]), 0.0);

  const auto p = pointer_firstorder(InterferometerSetting(std::numbers::pi / 2), kick_for(0.01), lab_beam);
  const complex ratio = p.coefficients[1] / p.coefficients[0];
  EXPECT_NEAR(ratio.real(), 0.005, 1e-14);
  EXPECT_NEAR(ratio.imag(), 0.0, 1e-14);
  EXPECT_NEAR(std::norm(p.coefficients[0]) + std::norm(p.coefficients[1]), 1.0, 1e-15);
  EXPECT_FALSE(p.weakness_warning);
}

TEST(PointerFirstOrder, WeaknessWarning) {
  EXPECT_TRUE(pointer_firstorder(InterferometerSetting(0.02), kick_for(0.1), lab_beam).weakness_warning);
  EXPECT_FALSE(pointer_firstorder(InterferometerSetting(0.02), kick_for(1e-4), lab_beam).weakness_warning);
  EXPECT_TRUE(pointer_firstorder(InterferometerSetting(0.02), kick_for(1e-4), lab_beam, 1e-3).weakness_warning);
}

TEST(PointerFirstOrder, AgreesWithExactDecompositionToFirstOrder) {
  for (double phi : {0.1, 0.5, 1.3, 2.8})
    for (double kw : {1e-4, 1e-3, 1e-2}) {
      const auto first = pointer_firstorder(InterferometerSetting(phi), kick_for(kw), lab_beam);
      const auto exact = decompose_field(dark_port_field(InterferometerSetting(phi), kick_for(kw), lab_beam).field, 1, lab_beam);
      const double r_first = std::abs(first.coefficients[1] / first.coefficients[0]);
      const double r_exact = std::abs(exact.coefficients[1] / exact.coefficients[0]);
      EXPECT_LT(std::abs(r_first - r_exact) / r_exact, kw * kw) << phi << "," << kw;
    }
}

TEST(AmplifiedShift, Amplification) {
  EXPECT_NEAR(amplified_shift(InterferometerSetting(std::numbers::pi), kick_for(1e-3), lab_beam).amplification, 0.0,
              1e-15);
  EXPECT_NEAR(amplified_shift(InterferometerSetting(0.02), kick_for(1e-3), lab_beam).amplification, 100.0, 0.01);
  const double a1 = amplified_shift(InterferometerSetting(0.02), kick_for(1e-3), lab_beam).amplification;
  const double a2 = amplified_shift(InterferometerSetting(0.01), kick_for(1e-3), lab_beam).amplification;
  EXPECT_NEAR(a2 / a1, 2.0, 2e-3);
  EXPECT_THROW(amplified_shift(InterferometerSetting(1e-10), kick_for(1e-3), lab_beam), singular_phase);
}

TEST(AmplifiedShift, MatchesExactCentroidInWeakRegime) {
  const double phi = 0.5, kw = 1e-4;
  const auto shift = amplified_shift(InterferometerSetting(phi), kick_for(kw), lab_beam);
  EXPECT_NEAR(shift.shift, 0.5 * cot_half(phi) * kw * lab_beam.waist(), 1e-20);
  const double centroid = dark_port_centroid(dark_port_field(InterferometerSetting(phi), kick_for(kw), lab_beam));
  EXPECT_NEAR(centroid, shift.shift, 1e-3 * shift.shift);
}

TEST(WeakRegimeCheck, FlagsBreakdownAtLargeKick) {
  const auto bad = weak_regime_check(InterferometerSetting(0.02), kick_for(0.1), lab_beam);
  EXPECT_TRUE(bad.outside_weak_regime);
  EXPECT_GT(bad.shift_discrepancy, 0.01);
  EXPECT_GT(bad.first_order_shift, bad.exact_shift);

  const auto good = weak_regime_check(InterferometerSetting(0.3636), kick_for(1e-4), lab_beam);
  EXPECT_FALSE(good.outside_weak_regime);
  EXPECT_LT(std::abs(good.shift_discrepancy), 0.01);
  EXPECT_NEAR(good.exact_ratio, good.first_order_ratio, 1e-3 * good.first_order_ratio);
}

TEST(ExactApproximateConsistency, GridWhereKickIsSmallAgainstPhase) {
  for (double phi = 0.05; phi <= std::numbers::pi - 0.05; phi += 0.15)
    for (double kw : {1e-5, 1e-4, 1e-3, 1e-2}) {
      if (kw > 0.01 * std::tan(phi / 2)) continue;
      const auto dec = decompose_field(dark_port_field(InterferometerSetting(phi), kick_for(kw), lab_beam).field, 1, lab_beam);
      const double ratio = std::abs(dec.coefficients[1] / dec.coefficients[0]);
      const double want = cot_half(phi) * kw / 2;
      EXPECT_NEAR(ratio, want, 1e-2 * want) << phi << "," << kw;
    }
}
