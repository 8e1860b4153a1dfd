#pragma once

// Sagnac weak-value pipeline. The system is the path qubit
// {|+> clockwise, |->counterclockwise}, the pointer is the transverse beam
// profile. Pre-selection |i> = (e^{-i phi/2}|+> + e^{i phi/2}|->)/sqrt(2),
// post-selection onto the dark port |f> = (|+> - |->)/sqrt(2), and the tilt
// couples through exp(-i A k x) with A = |+><+| - |-><-|.

#include <cmath>
#include <complex>
#include <vector>

#include "wvtilt/constants.hpp"
#include "wvtilt/errors.hpp"
#include "wvtilt/hg_modes.hpp"

namespace wvtilt {

inline constexpr double default_phase_floor = 1e-9;
inline constexpr double default_weakness_limit = 0.1;

/// Relative Sagnac phase phi in (0, pi].
class InterferometerSetting {
 public:
  explicit InterferometerSetting(double phi) : phi_(phi) {
    if (!(phi > 0.0) || phi > constants::pi)
      throw validation_error("InterferometerSetting: phi must lie in (0, pi]");
  }

  /// Inverse of P_m = sin^2(phi/2).
  static InterferometerSetting from_postselection_probability(double p_m) {
    if (!(p_m > 0.0) || p_m > 1.0)
      throw validation_error("post-selection probability must lie in (0, 1]");
    return InterferometerSetting(2.0 * std::asin(std::sqrt(p_m)));
  }

  double phi() const { return phi_; }
  double postselection_probability() const {
    const double s = std::sin(0.5 * phi_);
    return s * s;
  }
  double cos_half_phi() const { return std::cos(0.5 * phi_); }

 private:
  double phi_;
};

/// Mirror tilt theta and the matching transverse kick k = 2 pi theta / lambda.
class TiltKick {
 public:
  static TiltKick from_tilt(double theta_rad, const BeamGeometry& geometry) {
    return TiltKick(theta_rad, 2.0 * constants::pi * theta_rad / geometry.wavelength());
  }
  static TiltKick from_momentum(double k, const BeamGeometry& geometry) {
    return TiltKick(k * geometry.wavelength() / (2.0 * constants::pi), k);
  }
  static TiltKick none() { return TiltKick(0.0, 0.0); }

  double theta() const { return theta_; }
  double k() const { return k_; }

 private:
  TiltKick(double theta, double k) : theta_(theta), k_(k) {}
  double theta_;
  double k_;
};

/// Path-qubit amplitudes on {|+>, |->}.
struct SystemState {
  complex plus;
  complex minus;

  double norm_squared() const { return std::norm(plus) + std::norm(minus); }
  complex inner(const SystemState& ket) const { return std::conj(plus) * ket.plus + std::conj(minus) * ket.minus; }
  /// The path operator A = |+><+| - |-><-| applied to this state.
  SystemState apply_path_operator() const { return {plus, -minus}; }
};

/// The weak interaction H = lambda g(t) A k x with g integrated to one, so
/// the effective coupling per pass is the kick itself.
struct WeakInteraction {
  double coupling;  // rad / m

  static WeakInteraction from_kick(const TiltKick& kick) { return {kick.k()}; }
};

inline SystemState preselect(const InterferometerSetting& setting) {
  const double h = 0.5 * setting.phi();
  const double r = 1.0 / std::sqrt(2.0);
  return {r * std::polar(1.0, -h), r * std::polar(1.0, h)};
}

/// The dark-port post-selection state.
inline SystemState postselected_state() {
  const double r = 1.0 / std::sqrt(2.0);
  return {complex(r, 0.0), complex(-r, 0.0)};
}

/// A_w = <f|A|i> / <f|i> = i cot(phi/2).
inline complex weak_value(const InterferometerSetting& setting, double phase_floor = default_phase_floor) {
  if (setting.phi() < phase_floor) throw singular_phase("weak value diverges: phi below phase floor");
  const double h = 0.5 * setting.phi();
  return complex(0.0, std::cos(h) / std::sin(h));
}

/// P_m = |<f|i>|^2 = sin^2(phi/2).
inline double postselection_probability(const InterferometerSetting& setting) {
  return setting.postselection_probability();
}

struct DarkPortField {
  /// Unit-norm dark-port pointer field.
  SampledField field;
  /// Norm of the unnormalized field: the exact post-selection probability.
  double probability;
};

/// Exact post-selected pointer <f| exp(-i A k x) |i> psi_0(x), which is
/// proportional to sin(phi/2 + k x) psi_0(x) up to a global phase.
inline DarkPortField dark_port_field(const InterferometerSetting& setting, const TiltKick& kick,
                                     const BeamGeometry& geometry, std::vector<double> grid) {
  const double h = 0.5 * setting.phi();
  const double k = WeakInteraction::from_kick(kick).coupling;
  std::vector<complex> samples(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    samples[i] = std::sin(h + k * grid[i]) * mode_amplitude(0, grid[i], geometry);
  SampledField raw(std::move(grid), std::move(samples));
  require_span(raw, geometry);
  const double p = raw.norm_squared();
  return {raw.normalized(), p};
}

inline DarkPortField dark_port_field(const InterferometerSetting& setting, const TiltKick& kick,
                                     const BeamGeometry& geometry) {
  return dark_port_field(setting, kick, geometry, default_grid(geometry));
}

struct FirstOrderPointer {
  /// Unit-norm (c_0, c_1).
  ModeCoefficients coefficients;
  /// |A_w| k w0 / 2, the size of the TEM10 admixture relative to TEM00.
  double weakness_ratio;
  bool weakness_warning;
};

/// psi_0 - i (w0 A_w k / 2) psi_1, renormalized.
inline FirstOrderPointer pointer_firstorder(const InterferometerSetting& setting, const TiltKick& kick,
                                            const BeamGeometry& geometry,
                                            double weakness_limit = default_weakness_limit) {
  const complex aw = weak_value(setting);
  const complex c1 = complex(0.0, -1.0) * geometry.waist() * aw * kick.k() * 0.5;
  const double norm = std::sqrt(1.0 + std::norm(c1));
  const double ratio = std::abs(c1);
  return {ModeCoefficients({complex(1.0 / norm, 0.0), c1 / norm}), ratio, ratio >= weakness_limit};
}

struct AmplifiedShift {
  /// |A_w| k w0^2 / 2 in meters: the first-order centroid shift of the pointer.
  double shift;
  /// |A_w| = cot(phi/2).
  double amplification;
};

inline AmplifiedShift amplified_shift(const InterferometerSetting& setting, const TiltKick& kick,
                                      const BeamGeometry& geometry) {
  const double a = std::abs(weak_value(setting));
  const double w = geometry.waist();
  return {0.5 * a * kick.k() * w * w, a};
}

/// Exact transverse centroid <x> of the dark-port intensity.
inline double dark_port_centroid(const DarkPortField& dark) {
  const auto x = dark.field.grid();
  const auto e = dark.field.samples();
  std::vector<double> moment(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) moment[i] = x[i] * std::norm(e[i]);
  return simpson<double>(moment, dark.field.spacing()) / dark.field.norm_squared();
}

/// Comparison of the first-order weak-value picture with the exact field.
struct RegimeCheck {
  double first_order_ratio;  // cot(phi/2) k w0 / 2
  double exact_ratio;        // |c1/c0| from decomposing the exact field
  double first_order_shift;  // m
  double exact_shift;        // m
  /// (first_order_shift - exact_shift) / exact_shift
  double shift_discrepancy;
  double weakness_ratio;
  /// Raised when the weakness ratio passes its limit or the centroid
  /// predictions disagree by more than 1%.
  bool outside_weak_regime;
};

inline RegimeCheck weak_regime_check(const InterferometerSetting& setting, const TiltKick& kick,
                                     const BeamGeometry& geometry,
                                     double weakness_limit = default_weakness_limit) {
  const auto first = pointer_firstorder(setting, kick, geometry, weakness_limit);
  const auto dark = dark_port_field(setting, kick, geometry);
  const auto dec = decompose_field(dark.field, 1, geometry);
  const double exact_ratio = std::abs(dec.coefficients[1]) / std::abs(dec.coefficients[0]);
  const double first_shift = amplified_shift(setting, kick, geometry).shift;
  const double exact_shift = dark_port_centroid(dark);
  const double discrepancy = exact_shift != 0.0 ? (first_shift - exact_shift) / exact_shift : 0.0;
  return {first.weakness_ratio, exact_ratio,  first_shift, exact_shift, discrepancy, first.weakness_ratio,
          first.weakness_warning || std::abs(discrepancy) > 0.01};
}

}  // namespace wvtilt
