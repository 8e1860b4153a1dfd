#pragma once

// Monte Carlo shot-noise simulation of balanced homodyne and split detection.
// It is an independent oracle for detection.hpp: the weak value comes from
// the path-qubit states, the split-detector efficiency from a quadrature of
// the dark-port intensity, and the noise from explicit sampling.
//
// Field convention: the dark-port beam carries sqrt(N') (psi_0 + beta psi_1)
// with beta = |A_w| k w0, the TEM10 amplitude at which the homodyne
// quadrature mean equals 2 sqrt(N') |A_w| k w0.
//
// Trials are cut into fixed chunks of `chunk_trials`. Chunk j draws from the
// Philox stream (seed, j) and is reduced on its own; chunk results are merged
// in index order. The output therefore does not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "wvtilt/detection.hpp"
#include "wvtilt/errors.hpp"
#include "wvtilt/hg_modes.hpp"
#include "wvtilt/philox.hpp"
#include "wvtilt/weak_measurement.hpp"

namespace wvtilt {

enum class PhotonModel { gaussian_quadrature, poisson_counting };

inline constexpr std::uint64_t chunk_trials = 65536;

struct McConfig {
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 0;
  PhotonModel model = PhotonModel::gaussian_quadrature;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;

  void validate() const {
    if (trials < 1) throw validation_error("McConfig: trials must be at least 1");
  }
};

/// Running central moments up to fourth order (Terriberry update, Pebay merge).
struct MomentAccumulator {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  void add(double x) {
    const double n1 = n;
    n += 1.0;
    const double delta = x - mean;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double term1 = delta * dn * n1;
    mean += dn;
    m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
    m3 += term1 * dn * (n - 2.0) - 3.0 * dn * m2;
    m2 += term1;
  }

  void merge(const MomentAccumulator& b) {
    if (b.n == 0.0) return;
    if (n == 0.0) {
      *this = b;
      return;
    }
    const double na = n, nb = b.n, nt = na + nb;
    const double d = b.mean - mean;
    const double d2 = d * d, d3 = d2 * d, d4 = d2 * d2;
    const double m2t = m2 + b.m2 + d2 * na * nb / nt;
    const double m3t = m3 + b.m3 + d3 * na * nb * (na - nb) / (nt * nt) + 3.0 * d * (na * b.m2 - nb * m2) / nt;
    const double m4t = m4 + b.m4 + d4 * na * nb * (na * na - na * nb + nb * nb) / (nt * nt * nt) +
                       6.0 * d2 * (na * na * b.m2 + nb * nb * m2) / (nt * nt) + 4.0 * d * (na * b.m3 - nb * m3) / nt;
    mean += d * nb / nt;
    m2 = m2t;
    m3 = m3t;
    m4 = m4t;
    n = nt;
  }
};

/// Empirical detection statistics of one run. Units match DetectionOutcome.
struct EmpiricalOutcome {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double variance = 0.0;
  double snr = 0.0;
  double mean_stderr = 0.0;
  /// Delta-method standard error of snr from the sample moments.
  double snr_stderr = 0.0;

  static EmpiricalOutcome from_moments(const MomentAccumulator& acc, std::uint64_t seed) {
    EmpiricalOutcome out;
    out.trials = static_cast<std::uint64_t>(acc.n);
    out.seed = seed;
    out.mean = acc.mean;
    if (acc.n < 2.0) {
      out.mean_stderr = std::numeric_limits<double>::infinity();
      out.snr_stderr = std::numeric_limits<double>::infinity();
      return out;
    }
    const double n = acc.n;
    out.variance = acc.m2 / (n - 1.0);
    const double mu = acc.mean, var = out.variance;
    out.snr = mu * mu / var;
    out.mean_stderr = std::sqrt(var / n);
    const double c2 = acc.m2 / n, c3 = acc.m3 / n, c4 = acc.m4 / n;
    const double d_mu = 2.0 * mu / c2;
    const double d_var = -mu * mu / (c2 * c2);
    const double v = (d_mu * d_mu * c2 + d_var * d_var * (c4 - c2 * c2) + 2.0 * d_mu * d_var * c3) / n;
    out.snr_stderr = std::sqrt(std::max(v, 0.0));
    return out;
  }
};

namespace detail {

/// |A_w| straight from <f|A|i> / <f|i> on the path qubit.
inline double weak_value_magnitude_from_states(const InterferometerSetting& setting) {
  const SystemState i = preselect(setting);
  const SystemState f = postselected_state();
  const complex overlap = f.inner(i);
  if (std::abs(overlap) < 1e-300) throw singular_phase("post-selection overlap vanishes");
  return std::abs(f.inner(i.apply_path_operator()) / overlap);
}

/// Runs `trials` samples of `draw` split into chunks and merges in order.
template <typename Draw>
MomentAccumulator run_chunks(const McConfig& config, Draw draw) {
  const std::uint64_t chunks = (config.trials + chunk_trials - 1) / chunk_trials;
  std::vector<MomentAccumulator> partial(chunks);
  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      PhiloxStream rng(config.seed, c);
      const std::uint64_t begin = c * chunk_trials;
      const std::uint64_t end = std::min(config.trials, begin + chunk_trials);
      MomentAccumulator acc;
      for (std::uint64_t t = begin; t < end; ++t) acc.add(draw(rng));
      partial[c] = acc;
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  MomentAccumulator total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace detail

/// Shot-noise-limited BHD with a TEM10 local oscillator. Output is the
/// difference photocount divided by sqrt(N_LO).
///
/// gaussian_quadrature: 2 sqrt(N') beta + sqrt(var) Z.
/// poisson_counting: the two balanced detectors receive Poisson counts with
/// means (sqrt(N_LO) +/- sqrt(N') beta)^2 / 2; the noise variance argument is
/// ignored (coherent light) and N_LO must be positive.
inline EmpiricalOutcome simulate_bhd(const McConfig& config, const PhotonBudget& budget,
                                     const InterferometerSetting& setting, const TiltKick& kick,
                                     const BeamGeometry& geometry,
                                     const NoiseQuadrature& noise = NoiseQuadrature::coherent()) {
  config.validate();
  budget.validate();
  const double beta = detail::weak_value_magnitude_from_states(setting) * kick.k() * geometry.waist();
  const double alpha_s = std::sqrt(budget.n_signal) * beta;
  MomentAccumulator acc;
  if (config.model == PhotonModel::gaussian_quadrature) {
    const double sigma = std::sqrt(noise.variance());
    acc = detail::run_chunks(config, [=](PhiloxStream& rng) { return 2.0 * alpha_s + sigma * rng.normal(); });
  } else {
    if (!(budget.n_lo > 0.0)) throw validation_error("poisson BHD needs a positive LO photon number");
    const double alpha_lo = std::sqrt(budget.n_lo);
    const double mean_a = 0.5 * (alpha_lo + alpha_s) * (alpha_lo + alpha_s);
    const double mean_b = 0.5 * (alpha_lo - alpha_s) * (alpha_lo - alpha_s);
    acc = detail::run_chunks(config, [=](PhiloxStream& rng) {
      const double a = rng.poisson(mean_a);
      const double b = rng.poisson(mean_b);
      return (a - b) / alpha_lo;
    });
  }
  return EmpiricalOutcome::from_moments(acc, config.seed);
}

/// Split-detector fractions of the dark-port intensity on x < 0 and x > 0.
struct HalfPlaneSplit {
  double left;
  double right;
};

/// Integrates |psi_0 + beta psi_1|^2 over each half plane on a symmetric
/// grid with a node at x = 0 and returns the normalized fractions.
inline HalfPlaneSplit half_plane_split(double beta, const BeamGeometry& geometry, std::size_t points = 2001,
                                       double half_width_waists = 6.0) {
  if (points < 5 || points % 2 == 0) throw validation_error("half-plane grid needs an odd point count >= 5");
  if (half_width_waists < minimum_span_waists) throw grid_too_narrow("grid must span at least +/-5 waists");
  const auto x = uniform_grid(half_width_waists * geometry.waist(), points);
  std::vector<double> intensity(points);
  for (std::size_t i = 0; i < points; ++i) {
    const auto psi = mode_values(1, x[i], geometry);
    const double u = psi[0] + beta * psi[1];
    intensity[i] = u * u;
  }
  const double h = x[1] - x[0];
  const std::size_t mid = points / 2;
  const std::span<const double> all(intensity);
  const double left = simpson<double>(all.first(mid + 1), h);
  const double right = simpson<double>(all.subspan(mid), h);
  const double total = left + right;
  return {left / total, right / total};
}

/// Integral of sign(x) psi_0 psi_1, the split detector's TEM10 overlap
/// (sqrt(2/pi) analytically).
inline double half_plane_overlap(const BeamGeometry& geometry, std::size_t points = 2001,
                                 double half_width_waists = 6.0) {
  if (points < 5 || points % 2 == 0) throw validation_error("half-plane grid needs an odd point count >= 5");
  if (half_width_waists < minimum_span_waists) throw grid_too_narrow("grid must span at least +/-5 waists");
  const auto x = uniform_grid(half_width_waists * geometry.waist(), points);
  std::vector<double> f(points);
  for (std::size_t i = 0; i < points; ++i) {
    const auto psi = mode_values(1, x[i], geometry);
    f[i] = psi[0] * psi[1];
  }
  const double h = x[1] - x[0];
  const std::size_t mid = points / 2;
  const std::span<const double> all(f);
  return simpson<double>(all.subspan(mid), h) - simpson<double>(all.first(mid + 1), h);
}

/// Split detection of the dark-port beam. Output is (n_right - n_left)/sqrt(N').
///
/// gaussian_quadrature: sqrt(N') (f_R - f_L) + Z.
/// poisson_counting: n_R ~ Poisson(N' f_R), n_L ~ Poisson(N' f_L).
inline EmpiricalOutcome simulate_sd(const McConfig& config, const PhotonBudget& budget,
                                    const InterferometerSetting& setting, const TiltKick& kick,
                                    const BeamGeometry& geometry, std::size_t grid_points = 2001,
                                    double half_width_waists = 6.0) {
  config.validate();
  budget.validate();
  if (!(budget.n_signal > 0.0)) throw validation_error("split detection needs a positive signal photon number");
  const double beta = detail::weak_value_magnitude_from_states(setting) * kick.k() * geometry.waist();
  const HalfPlaneSplit split = half_plane_split(beta, geometry, grid_points, half_width_waists);
  const double n_sig = budget.n_signal;
  const double scale = std::sqrt(n_sig);
  MomentAccumulator acc;
  if (config.model == PhotonModel::gaussian_quadrature) {
    const double mu = scale * (split.right - split.left);
    acc = detail::run_chunks(config, [=](PhiloxStream& rng) { return mu + rng.normal(); });
  } else {
    const double mean_r = n_sig * split.right;
    const double mean_l = n_sig * split.left;
    acc = detail::run_chunks(config, [=](PhiloxStream& rng) {
      const double r = rng.poisson(mean_r);
      const double l = rng.poisson(mean_l);
      return (r - l) / scale;
    });
  }
  return EmpiricalOutcome::from_moments(acc, config.seed);
}

inline std::string to_string(PhotonModel m) {
  return m == PhotonModel::gaussian_quadrature ? "gaussian" : "poisson";
}

}  // namespace wvtilt
