#pragma once

// File formats: field CSV (x_m,re,im), Table-1-style record CSV, sweep CSV,
// scenario JSON and the Monte Carlo summary JSON.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "wvtilt/errors.hpp"
#include "wvtilt/hg_modes.hpp"
#include "wvtilt/lab_experiment.hpp"
#include "wvtilt/shot_noise_mc.hpp"

namespace wvtilt::io {

inline constexpr std::string_view field_csv_header = "x_m,re,im";
inline constexpr std::string_view records_csv_header = "p_in_uw,p_out_uw,v_mv,theta_min_nrad";
inline constexpr std::string_view sweep_csv_header = "axis,snr_bhd,snr_sd,mmt_bhd_rad,mmt_sd_rad";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw validation_error("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error("empty CSV: expected header '" + std::string(header) + "'");
  const auto got = split(line);
  const auto want = split(header);
  bool ok = got.size() == want.size();
  for (std::size_t i = 0; ok && i < got.size(); ++i) ok = got[i] == want[i];
  if (!ok) throw validation_error("CSV header must be '" + std::string(header) + "', got '" + line + "'");
}

/// Rows of exactly `columns` numbers; blank lines are skipped.
inline std::vector<std::vector<double>> read_rows(std::istream& in, std::size_t columns) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns)
      throw validation_error("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
    std::vector<double> row;
    for (auto c : cells) row.push_back(parse_double(c, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

inline void write_field_csv(std::ostream& out, const SampledField& field) {
  out << field_csv_header << '\n';
  for (std::size_t i = 0; i < field.size(); ++i)
    out << detail::fmt(field.grid()[i]) << ',' << detail::fmt(field.samples()[i].real()) << ','
        << detail::fmt(field.samples()[i].imag()) << '\n';
}

inline SampledField read_field_csv(std::istream& in) {
  detail::expect_header(in, field_csv_header);
  std::vector<double> x;
  std::vector<complex> s;
  for (const auto& row : detail::read_rows(in, 3)) {
    x.push_back(row[0]);
    s.emplace_back(row[1], row[2]);
  }
  return SampledField(std::move(x), std::move(s));
}

/// Lab units: microwatts, millivolts, nanoradians.
inline void write_records_csv(std::ostream& out, const std::vector<MeasurementRecord>& records) {
  out << records_csv_header << '\n';
  for (const auto& r : records)
    out << detail::fmt(r.p_in * 1e6) << ',' << detail::fmt(r.p_out * 1e6) << ',' << detail::fmt(r.drive_voltage * 1e3)
        << ',' << detail::fmt(r.theta_min * 1e9) << '\n';
}

inline std::vector<MeasurementRecord> read_records_csv(std::istream& in) {
  detail::expect_header(in, records_csv_header);
  std::vector<MeasurementRecord> out;
  for (const auto& row : detail::read_rows(in, 4)) {
    MeasurementRecord r{row[0] * 1e-6, row[1] * 1e-6, row[2] * 1e-3, row[3] * 1e-9, std::nullopt};
    if (!(r.theta_min > 0.0)) throw validation_error("theta_min must be positive");
    out.push_back(r);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << sweep_csv_header << '\n';
  for (const auto& r : rows)
    out << detail::fmt(r.axis) << ',' << detail::fmt(r.snr_bhd) << ',' << detail::fmt(r.snr_sd) << ','
        << detail::fmt(r.mmt_bhd) << ',' << detail::fmt(r.mmt_sd) << '\n';
}

inline nlohmann::ordered_json scenario_to_json(const LabScenario& s) {
  nlohmann::ordered_json j;
  j["wavelength_m"] = s.geometry.wavelength();
  j["waist_m"] = s.geometry.waist();
  j["p_in_w"] = s.p_in;
  j["p_out_w"] = s.p_out;
  j["p_lo_w"] = s.p_lo;
  j["rbw_hz"] = s.rbw;
  j["analysis_frequency_hz"] = s.analysis_frequency;
  j["efficiency"] = s.efficiency;
  j["piezo_slope_rad_per_v"] = s.piezo_slope;
  return j;
}

/// Missing keys keep the values of `base`; unknown keys are rejected.
inline LabScenario scenario_from_json(const nlohmann::json& j, LabScenario base = {}) {
  if (!j.is_object()) throw validation_error("scenario must be a JSON object");
  double wavelength = base.geometry.wavelength();
  double waist = base.geometry.waist();
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw validation_error("scenario field '" + key + "' must be a number");
    const double v = value.get<double>();
    if (key == "wavelength_m") wavelength = v;
    else if (key == "waist_m") waist = v;
    else if (key == "p_in_w") base.p_in = v;
    else if (key == "p_out_w") base.p_out = v;
    else if (key == "p_lo_w") base.p_lo = v;
    else if (key == "rbw_hz") base.rbw = v;
    else if (key == "analysis_frequency_hz") base.analysis_frequency = v;
    else if (key == "efficiency") base.efficiency = v;
    else if (key == "piezo_slope_rad_per_v") base.piezo_slope = v;
    else throw validation_error("unknown scenario field '" + key + "'");
  }
  base.geometry = BeamGeometry(wavelength, waist);
  base.validate();
  return base;
}

inline LabScenario read_scenario_file(const std::string& path, LabScenario base = {}) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open scenario file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j, base);
}

inline nlohmann::ordered_json mc_summary_json(const EmpiricalOutcome& r) {
  nlohmann::ordered_json j;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["mean"] = r.mean;
  j["variance"] = r.variance;
  j["snr"] = r.snr;
  j["stderr"] = r.snr_stderr;
  return j;
}

}  // namespace wvtilt::io
