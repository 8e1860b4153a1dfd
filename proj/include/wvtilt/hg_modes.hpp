#pragma once

// One-dimensional Hermite-Gauss modes of a TEM00 beam with amplitude waist w0:
//
//   psi_n(x) = (2 / (pi w0^2))^{1/4} / sqrt(2^n n!) * H_n(sqrt(2) x / w0) * exp(-x^2 / w0^2)
//
// normalized so that the integral of psi_n^2 over the real line is 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wvtilt/constants.hpp"
#include "wvtilt/errors.hpp"
#include "wvtilt/quadrature.hpp"

namespace wvtilt {

using complex = std::complex<double>;

/// Wavelength and TEM00 amplitude waist, both in meters.
class BeamGeometry {
 public:
  BeamGeometry(double wavelength_m, double waist_m) : wavelength_(wavelength_m), waist_(waist_m) {
    if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m))
      throw validation_error("BeamGeometry: wavelength must be positive");
    if (!(waist_m > 0.0) || !std::isfinite(waist_m))
      throw validation_error("BeamGeometry: waist must be positive");
  }

  double wavelength() const { return wavelength_; }
  double waist() const { return waist_; }

  /// Set when the waist is under ten wavelengths and the paraxial mode
  /// picture is questionable. Informational only.
  bool paraxial_warning() const { return waist_ < 10.0 * wavelength_; }

  friend bool operator==(const BeamGeometry&, const BeamGeometry&) = default;

 private:
  double wavelength_;
  double waist_;
};

/// Complex field samples on a uniform, strictly increasing transverse grid.
class SampledField {
 public:
  SampledField(std::vector<double> grid, std::vector<complex> samples)
      : grid_(std::move(grid)), samples_(std::move(samples)) {
    if (grid_.size() != samples_.size())
      throw validation_error("SampledField: grid and samples differ in length");
    if (grid_.size() < 3) throw validation_error("SampledField: need at least three samples");
    const double h = (grid_.back() - grid_.front()) / static_cast<double>(grid_.size() - 1);
    if (!(h > 0.0)) throw non_uniform_grid("SampledField: grid must be strictly increasing");
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      const double step = grid_[i] - grid_[i - 1];
      if (!(step > 0.0)) throw non_uniform_grid("SampledField: grid must be strictly increasing");
      if (std::abs(step - h) > 1e-12 * h + 1e-12 * std::abs(grid_[i]))
        throw non_uniform_grid("SampledField: grid spacing is not uniform");
    }
    spacing_ = h;
  }

  std::span<const double> grid() const { return grid_; }
  std::span<const complex> samples() const { return samples_; }
  std::size_t size() const { return grid_.size(); }
  double spacing() const { return spacing_; }

  /// Integral of |E|^2 over the grid (Simpson).
  double norm_squared() const {
    std::vector<double> intensity(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) intensity[i] = std::norm(samples_[i]);
    return simpson<double>(intensity, spacing_);
  }

  /// Copy scaled to unit norm. A zero field is returned unchanged.
  SampledField normalized() const {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) return *this;
    SampledField out = *this;
    const double s = 1.0 / std::sqrt(n2);
    for (auto& v : out.samples_) v *= s;
    return out;
  }

  /// True when the grid covers [-half_width, +half_width].
  bool spans(double half_width) const {
    const double slack = 1e-9 * half_width;
    return grid_.front() <= -half_width + slack && grid_.back() >= half_width - slack;
  }

 private:
  std::vector<double> grid_;
  std::vector<complex> samples_;
  double spacing_ = 0.0;
};

/// Complex amplitudes c_0..c_max_order on the HG basis.
class ModeCoefficients {
 public:
  ModeCoefficients() = default;
  explicit ModeCoefficients(std::vector<complex> coeffs) : coeffs_(std::move(coeffs)) {}

  int max_order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const complex& operator[](std::size_t n) const { return coeffs_[n]; }
  complex& operator[](std::size_t n) { return coeffs_[n]; }
  std::span<const complex> coeffs() const { return coeffs_; }

  double power() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s;
  }

 private:
  std::vector<complex> coeffs_;
};

/// Physicists' Hermite polynomial by upward recurrence
/// H_{n+1} = 2u H_n - 2n H_{n-1}. Finite for n <= 30, |u| <= 20.
inline double hermite_poly(int n, double u) {
  if (n < 0) throw validation_error("hermite_poly: order must be non-negative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * u;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * u * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Peak amplitude of the normalized TEM00 mode, (2 / (pi w0^2))^{1/4}.
inline double mode_prefactor(const BeamGeometry& geometry) {
  const double w = geometry.waist();
  return std::pow(2.0 / (constants::pi * w * w), 0.25);
}

/// psi_n(x) in m^{-1/2}.
inline double mode_amplitude(int n, double x, const BeamGeometry& geometry) {
  if (n < 0) throw validation_error("mode_amplitude: order must be non-negative");
  const double w = geometry.waist();
  const double u = std::sqrt(2.0) * x / w;
  // 1/sqrt(2^n n!) accumulated as a product to stay finite for moderate n
  double norm = 1.0;
  for (int k = 1; k <= n; ++k) norm /= std::sqrt(2.0 * k);
  return mode_prefactor(geometry) * norm * hermite_poly(n, u) * std::exp(-x * x / (w * w));
}

/// psi_0(x)..psi_max_order(x) at one point via the normalized three-term
/// recurrence psi_{n+1} = u sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1}.
inline std::vector<double> mode_values(int max_order, double x, const BeamGeometry& geometry) {
  if (max_order < 0) throw validation_error("mode_values: order must be non-negative");
  const double w = geometry.waist();
  const double u = std::sqrt(2.0) * x / w;
  std::vector<double> psi(static_cast<std::size_t>(max_order) + 1);
  psi[0] = mode_prefactor(geometry) * std::exp(-x * x / (w * w));
  if (max_order >= 1) psi[1] = u * std::sqrt(2.0) * psi[0];
  for (int n = 1; n < max_order; ++n) {
    psi[n + 1] = u * std::sqrt(2.0 / (n + 1)) * psi[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * psi[n - 1];
  }
  return psi;
}

/// Uniform grid of `points` samples over [-half_width, +half_width].
inline std::vector<double> uniform_grid(double half_width, std::size_t points) {
  if (points < 3) throw validation_error("uniform_grid: need at least three points");
  if (!(half_width > 0.0)) throw validation_error("uniform_grid: half width must be positive");
  std::vector<double> x(points);
  const double h = 2.0 * half_width / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) x[i] = -half_width + h * static_cast<double>(i);
  // exact symmetry, so the centre node is 0 for odd counts
  for (std::size_t i = 0; i < points / 2; ++i) x[points - 1 - i] = -x[i];
  if (points % 2 == 1) x[points / 2] = 0.0;
  return x;
}

inline constexpr std::size_t default_grid_points = 2001;
inline constexpr double default_grid_half_width_waists = 6.0;
inline constexpr double minimum_span_waists = 5.0;

/// The default decomposition grid: 2001 points over +/-6 waists.
inline std::vector<double> default_grid(const BeamGeometry& geometry) {
  return uniform_grid(default_grid_half_width_waists * geometry.waist(), default_grid_points);
}

inline SampledField sample_field(const std::function<complex(double)>& f, std::vector<double> grid) {
  std::vector<complex> s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s[i] = f(grid[i]);
  return SampledField(std::move(grid), std::move(s));
}

struct Decomposition {
  ModeCoefficients coefficients;
  /// 1 - sum |c_n|^2: power left in the truncated orders for a unit-norm field.
  double truncation_residual = 0.0;
  /// Integral of |E|^2 of the input field.
  double field_norm_squared = 0.0;
};

inline void require_span(const SampledField& field, const BeamGeometry& geometry) {
  if (!field.spans(minimum_span_waists * geometry.waist()))
    throw grid_too_narrow("grid must span at least +/-5 waists");
}

/// Projects sampled field onto psi_0..psi_max_order with Simpson quadrature.
inline Decomposition decompose_field(const SampledField& field, int max_order, const BeamGeometry& geometry) {
  if (max_order < 0) throw validation_error("decompose_field: order must be non-negative");
  require_span(field, geometry);
  const auto x = field.grid();
  const auto e = field.samples();
  const std::size_t orders = static_cast<std::size_t>(max_order) + 1;
  std::vector<std::vector<complex>> integrand(orders, std::vector<complex>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto psi = mode_values(max_order, x[i], geometry);
    for (std::size_t n = 0; n < orders; ++n) integrand[n][i] = psi[n] * e[i];
  }
  std::vector<complex> c(orders);
  for (std::size_t n = 0; n < orders; ++n) c[n] = simpson<complex>(integrand[n], field.spacing());
  Decomposition d{ModeCoefficients(std::move(c)), 0.0, field.norm_squared()};
  d.truncation_residual = 1.0 - d.coefficients.power();
  return d;
}

/// Decomposes an analytically known field. Starts from the default grid and
/// doubles the resolution until no coefficient moves by more than `tolerance`.
inline Decomposition decompose_function(const std::function<complex(double)>& f, int max_order,
                                        const BeamGeometry& geometry, double tolerance = 1e-10,
                                        int max_refinements = 8) {
  const double half_width = default_grid_half_width_waists * geometry.waist();
  std::size_t points = default_grid_points;
  Decomposition prev = decompose_field(sample_field(f, uniform_grid(half_width, points)), max_order, geometry);
  for (int r = 0; r < max_refinements; ++r) {
    points = 2 * points - 1;
    Decomposition next = decompose_field(sample_field(f, uniform_grid(half_width, points)), max_order, geometry);
    double change = 0.0;
    for (int n = 0; n <= max_order; ++n) change = std::max(change, std::abs(next.coefficients[n] - prev.coefficients[n]));
    prev = std::move(next);
    if (change < tolerance) break;
  }
  return prev;
}

/// Exact <psi_1| e^{ikx} |psi_0> = i (k w0 / 2) exp(-k^2 w0^2 / 8).
inline complex tilt_coupling_exact(double k, const BeamGeometry& geometry) {
  const double kw = k * geometry.waist();
  return complex(0.0, 0.5 * kw * std::exp(-kw * kw / 8.0));
}

/// First-order coupling i k w0 / 2, valid for k w0 << 1.
inline complex tilt_coupling_first_order(double k, const BeamGeometry& geometry) {
  return complex(0.0, 0.5 * k * geometry.waist());
}

}  // namespace wvtilt
