#pragma once

// Shot-noise-limited detection of the dark-port tilt signal.
//
// Balanced homodyne detection (BHD) with a TEM10 local oscillator:
//   SNR = (2 sqrt(N') |A_w| k w0)^2 / var = (2 sqrt(N) cos(phi/2) k w0)^2   (coherent light)
//   theta_min = lambda / (4 pi w0 sqrt(N) cos(phi/2))
// Split detection (SD) is 2/pi as efficient in SNR, sqrt(pi/2) worse in MMT.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>

#include "wvtilt/constants.hpp"
#include "wvtilt/errors.hpp"
#include "wvtilt/hg_modes.hpp"
#include "wvtilt/weak_measurement.hpp"

namespace wvtilt {

/// The phi -> 0 limit (perfectly dark port). The MMT and SNR stay finite
/// there even though the weak value does not, so closed-form detection
/// formulas accept it anywhere an InterferometerSetting is accepted.
struct DarkLimit {
  constexpr double cos_half_phi() const { return 1.0; }
  constexpr double postselection_probability() const { return 0.0; }
};

template <typename P>
concept PhaseSetting = requires(const P& p) {
  { p.cos_half_phi() } -> std::convertible_to<double>;
  { p.postselection_probability() } -> std::convertible_to<double>;
};

/// Photon numbers per measurement window.
struct PhotonBudget {
  double n_injected = 0.0;      // N, bright-port input
  double n_signal = 0.0;        // N', dark-port output
  double n_lo = 0.0;            // N_LO
  double n_conventional = 0.0;  // N'', conventional (no post-selection) scheme
  std::optional<double> n_saturation;

  /// Budget with N' = N P_m. The conventional scheme sees all N photons.
  static PhotonBudget from_setting(double n_injected, const InterferometerSetting& setting, double n_lo,
                                   std::optional<double> n_saturation = std::nullopt) {
    PhotonBudget b{n_injected, n_injected * setting.postselection_probability(), n_lo, n_injected, n_saturation};
    b.validate();
    return b;
  }

  void validate() const {
    if (!(n_injected > 0.0)) throw validation_error("PhotonBudget: injected photon number must be positive");
    if (n_signal < 0.0 || n_signal > n_injected * (1.0 + 1e-12))
      throw validation_error("PhotonBudget: signal photons must lie in [0, N]");
    if (n_lo < 0.0) throw validation_error("PhotonBudget: LO photon number must be non-negative");
    if (n_saturation && !(*n_saturation > 0.0)) throw validation_error("PhotonBudget: saturation must be positive");
  }

  /// The LO should dominate the signal by at least 100x.
  bool lo_warning() const { return n_lo < 100.0 * n_signal; }
};

/// Vacuum-normalized quadrature noise variance (1 for coherent light).
class NoiseQuadrature {
 public:
  explicit NoiseQuadrature(double variance = 1.0) : variance_(variance) {
    if (!(variance > 0.0)) throw validation_error("NoiseQuadrature: variance must be positive");
  }
  static NoiseQuadrature coherent() { return NoiseQuadrature(1.0); }
  double variance() const { return variance_; }

 private:
  double variance_;
};

struct DetectionOutcome {
  /// Difference photocurrent mean in units of sqrt(N_LO).
  double signal_mean = 0.0;
  double noise_variance = 1.0;
  double snr = 0.0;
  /// The common sqrt(N_LO) gain; it scales signal and noise alike.
  double lo_gain = 0.0;
};

/// BHD outcome in the N', A_w parameterization.
inline DetectionOutcome bhd_outcome(const PhotonBudget& budget, const InterferometerSetting& setting,
                                    const TiltKick& kick, const BeamGeometry& geometry,
                                    const NoiseQuadrature& noise = NoiseQuadrature::coherent()) {
  budget.validate();
  const double aw = std::abs(weak_value(setting));
  DetectionOutcome out;
  out.signal_mean = 2.0 * std::sqrt(budget.n_signal) * aw * kick.k() * geometry.waist();
  out.noise_variance = noise.variance();
  out.snr = out.signal_mean * out.signal_mean / out.noise_variance;
  out.lo_gain = std::sqrt(budget.n_lo);
  return out;
}

namespace detail {
inline void require_photons(double n) {
  if (!(n > 0.0) || !std::isfinite(n)) throw validation_error("photon number must be positive");
}
inline double bhd_amplitude(double n_injected, double cos_half, double k, double waist) {
  return 2.0 * std::sqrt(n_injected) * cos_half * k * waist;
}
}  // namespace detail

template <PhaseSetting Phase>
double snr_bhd(double n_injected, const Phase& phase, const TiltKick& kick, const BeamGeometry& geometry) {
  detail::require_photons(n_injected);
  const double a = detail::bhd_amplitude(n_injected, phase.cos_half_phi(), kick.k(), geometry.waist());
  return a * a;
}

template <PhaseSetting Phase>
double mmt_bhd(double n_injected, const Phase& phase, const BeamGeometry& geometry) {
  detail::require_photons(n_injected);
  const double c = phase.cos_half_phi();
  if (!(c > 1e-12)) throw divergent_mmt("MMT diverges at phi = pi (no dark port)");
  return geometry.wavelength() / (4.0 * constants::pi * geometry.waist() * std::sqrt(n_injected) * c);
}

inline constexpr double split_detection_snr_efficiency = 2.0 / constants::pi;

template <PhaseSetting Phase>
double snr_sd(double n_injected, const Phase& phase, const TiltKick& kick, const BeamGeometry& geometry) {
  return split_detection_snr_efficiency * snr_bhd(n_injected, phase, kick, geometry);
}

template <PhaseSetting Phase>
double mmt_sd(double n_injected, const Phase& phase, const BeamGeometry& geometry) {
  return std::sqrt(constants::pi / 2.0) * mmt_bhd(n_injected, phase, geometry);
}

struct SaturationGain {
  /// SNR of the WVA scheme over a conventional scheme capped at N_sat.
  double gain;
  /// Largest P_m keeping N' = N P_m within saturation.
  double max_postselection_probability;
  /// True when saturation forces P_m below 1.
  bool constrained;
};

/// With the dark port tuned so N' <= N_sat, the WVA SNR keeps the full
/// sqrt(N) scaling while a conventional detector is stuck at N'' = N_sat.
inline SaturationGain saturation_gain(double n_injected, double n_saturation) {
  detail::require_photons(n_injected);
  if (!(n_saturation > 0.0)) throw validation_error("saturation photon number must be positive");
  const double p_max = std::min(1.0, n_saturation / n_injected);
  if (!(p_max > 0.0)) throw infeasible_postselection("no post-selection probability keeps N' within saturation");
  const double conventional = std::min(n_injected, n_saturation);
  return {n_injected / conventional, p_max, p_max < 1.0};
}

}  // namespace wvtilt
