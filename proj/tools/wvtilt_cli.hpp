#pragma once

// Command-line front end. Every subcommand parses lab-unit inputs, calls
// into the wvtilt library and formats the result; no physics lives here.
//
// Exit status: 0 success, 2 validation error, 3 reproduction tolerance failure.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wvtilt/wvtilt.hpp"

namespace wvtilt::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_reproduction = 3;

/// Parsed `--set key=value` pairs. Values stay strings until a subcommand
/// reads them; anything a subcommand never reads is reported as unknown.
class Overrides {
 public:
  explicit Overrides(const std::vector<std::string>& pairs) {
    for (const auto& p : pairs) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) throw validation_error("--set expects key=value, got '" + p + "'");
      values_[p.substr(0, eq)] = p.substr(eq + 1);
    }
  }

  void reject_unknown(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : values_)
      if (!allowed.count(k)) throw validation_error("unknown override key '" + k + "'");
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<double> number(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != it->second.size() || !std::isfinite(v))
      throw validation_error("override '" + key + "' must be a number, got '" + it->second + "'");
    return v;
  }

  std::optional<std::string> text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Scenario override keys in lab units.
inline const std::set<std::string> scenario_keys = {
    "wavelength_nm", "waist_um", "p_in_uw", "p_out_uw", "p_lo_uw", "rbw_hz", "analysis_frequency_hz",
    "efficiency", "piezo_slope_nrad_per_mv"};

inline LabScenario apply_scenario_overrides(LabScenario s, const Overrides& o) {
  double wavelength = s.geometry.wavelength(), waist = s.geometry.waist();
  if (auto v = o.number("wavelength_nm")) wavelength = *v * 1e-9;
  if (auto v = o.number("waist_um")) waist = *v * 1e-6;
  if (auto v = o.number("p_in_uw")) s.p_in = *v * 1e-6;
  if (auto v = o.number("p_out_uw")) s.p_out = *v * 1e-6;
  if (auto v = o.number("p_lo_uw")) s.p_lo = *v * 1e-6;
  if (auto v = o.number("rbw_hz")) s.rbw = *v;
  if (auto v = o.number("analysis_frequency_hz")) s.analysis_frequency = *v;
  if (auto v = o.number("efficiency")) s.efficiency = *v;
  if (auto v = o.number("piezo_slope_nrad_per_mv")) s.piezo_slope = *v * 1e-9 / 1e-3;
  s.geometry = BeamGeometry(wavelength, waist);
  return s;
}

/// The operating point a single-point subcommand evaluates: photon number,
/// post-selection (nullopt = dark limit) and the tilt, if any.
struct OperatingPoint {
  LabScenario scenario;
  double n_injected;
  std::optional<InterferometerSetting> setting;
  std::optional<double> theta;
};

inline const std::set<std::string> point_keys = {"n_injected", "pm", "theta_nrad", "v_mv"};

inline OperatingPoint operating_point(const LabScenario& s, const Overrides& o) {
  OperatingPoint p{s, s.n_injected(), std::nullopt, std::nullopt};
  if (auto n = o.number("n_injected")) {
    if (!(*n > 0.0)) throw validation_error("n_injected must be positive");
    p.n_injected = *n;
  }
  if (auto pm = o.number("pm")) {
    if (*pm < 0.0 || *pm > 1.0) throw validation_error("pm must lie in [0, 1]");
    if (*pm > 0.0) p.setting = InterferometerSetting::from_postselection_probability(*pm);
  } else {
    s.validate();
    p.setting = s.setting();
  }
  if (auto t = o.number("theta_nrad")) p.theta = *t * 1e-9;
  if (auto v = o.number("v_mv")) {
    if (p.theta) throw validation_error("give either theta_nrad or v_mv, not both");
    p.theta = s.piezo_slope * *v * 1e-3;
  }
  return p;
}

template <typename F>
auto with_phase(const OperatingPoint& p, F&& f) {
  if (p.setting) return f(*p.setting);
  return f(DarkLimit{});
}

struct Options {
  std::string subcommand;
  std::string target;  // reproduce
  std::string scenario_path;
  std::vector<std::string> sets;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::uint64_t trials = 1'000'000;
  std::optional<double> tolerance;
  std::string dump_scenario;
  std::string records_path;
  std::string defaults_path;
};

class Runner {
 public:
  Runner(Options opt, std::ostream& out, std::ostream& err) : opt_(std::move(opt)), out_(out), err_(err) {}

  int run() {
    const Overrides o(opt_.sets);
    LabScenario base = table1_scenario();
    if (!opt_.scenario_path.empty()) base = io::read_scenario_file(opt_.scenario_path, base);
    const LabScenario scenario = apply_scenario_overrides(base, o);
    if (!opt_.dump_scenario.empty()) {
      scenario.validate();
      write_file(opt_.dump_scenario, io::scenario_to_json(scenario).dump(2) + "\n");
    }
    const auto& sc = opt_.subcommand;
    if (sc == "mmt") return cmd_mmt(scenario, o);
    if (sc == "snr") return cmd_snr(scenario, o);
    if (sc == "sweep") return cmd_sweep(scenario, o);
    if (sc == "reproduce") return cmd_reproduce(scenario, o);
    if (sc == "montecarlo") return cmd_montecarlo(scenario, o);
    if (sc == "calibrate") return cmd_calibrate(scenario, o);
    if (sc == "optimize") return cmd_optimize(scenario, o);
    throw validation_error("unknown subcommand '" + sc + "'");
  }

 private:
  static std::set<std::string> keys(std::initializer_list<const std::set<std::string>*> sets,
                                    std::initializer_list<std::string> extra = {}) {
    std::set<std::string> all(extra);
    for (const auto* s : sets) all.insert(s->begin(), s->end());
    return all;
  }

  void write_file(const std::string& path, const std::string& text) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot write '" + path + "'");
    f << text;
  }

  /// Data goes to --out when given, else to stdout.
  void emit(const std::string& text) const {
    if (opt_.out_path.empty()) out_ << text;
    else write_file(opt_.out_path, text);
  }

  bool json() const { return opt_.format == "json"; }

  std::vector<MeasurementRecord> records() const {
    if (opt_.records_path.empty()) return table1_records();
    std::ifstream in(opt_.records_path);
    if (!in) throw validation_error("cannot open records file '" + opt_.records_path + "'");
    return io::read_records_csv(in);
  }

  int cmd_mmt(const LabScenario& s, const Overrides& o) {
    o.reject_unknown(keys({&scenario_keys, &point_keys}));
    const auto p = operating_point(s, o);
    const BeamGeometry& g = s.geometry;
    const double bhd = with_phase(p, [&](const auto& ph) { return mmt_bhd(p.n_injected, ph, g); });
    const double sd = with_phase(p, [&](const auto& ph) { return mmt_sd(p.n_injected, ph, g); });
    const double eta = s.efficiency;
    std::ostringstream text;
    if (json()) {
      nlohmann::ordered_json j{{"n_injected", p.n_injected},
                               {"mmt_bhd_nrad", bhd * 1e9},
                               {"mmt_sd_nrad", sd * 1e9},
                               {"efficiency", eta},
                               {"mmt_bhd_measured_nrad", bhd / eta * 1e9}};
      text << j.dump(2) << '\n';
    } else {
      text << "n_injected,mmt_bhd_nrad,mmt_sd_nrad,efficiency,mmt_bhd_measured_nrad\n"
           << io::detail::fmt(p.n_injected) << ',' << io::detail::fmt(bhd * 1e9) << ',' << io::detail::fmt(sd * 1e9)
           << ',' << io::detail::fmt(eta) << ',' << io::detail::fmt(bhd / eta * 1e9) << '\n';
    }
    emit(text.str());
    err_ << "MMT (BHD): " << bhd * 1e9 << " nrad\nMMT (SD):  " << sd * 1e9 << " nrad\n";
    return exit_ok;
  }

  int cmd_snr(const LabScenario& s, const Overrides& o) {
    o.reject_unknown(keys({&scenario_keys, &point_keys}));
    const auto p = operating_point(s, o);
    if (!p.theta) throw validation_error("snr needs a tilt: --set theta_nrad=... or --set v_mv=...");
    const BeamGeometry& g = s.geometry;
    const auto kick = TiltKick::from_tilt(*p.theta, g);
    const double bhd = with_phase(p, [&](const auto& ph) { return snr_bhd(p.n_injected, ph, kick, g); });
    const double sd = with_phase(p, [&](const auto& ph) { return snr_sd(p.n_injected, ph, kick, g); });
    std::ostringstream text;
    if (json()) {
      nlohmann::ordered_json j{{"theta_nrad", *p.theta * 1e9}, {"snr_bhd", bhd}, {"snr_sd", sd}};
      text << j.dump(2) << '\n';
    } else {
      text << "theta_nrad,snr_bhd,snr_sd\n"
           << io::detail::fmt(*p.theta * 1e9) << ',' << io::detail::fmt(bhd) << ',' << io::detail::fmt(sd) << '\n';
    }
    emit(text.str());
    err_ << "SNR (BHD): " << bhd << "\nSNR (SD):  " << sd << '\n';
    return exit_ok;
  }

  int cmd_sweep(const LabScenario& s, const Overrides& o) {
    o.reject_unknown(keys({&scenario_keys}, {"axis", "from", "to", "points", "spacing", "hold", "theta_nrad"}));
    SweepSpec spec;
    const std::string axis = o.text("axis").value_or("postselection");
    if (axis == "postselection") spec.axis = SweepAxis::postselection;
    else if (axis == "injected_photons") spec.axis = SweepAxis::injected_photons;
    else if (axis == "tilt") spec.axis = SweepAxis::tilt;
    else if (axis == "waist") spec.axis = SweepAxis::waist;
    else throw validation_error("axis must be postselection|injected_photons|tilt|waist");
    const std::string hold = o.text("hold").value_or("injected");
    if (hold == "injected") spec.hold = SweepHold::injected;
    else if (hold == "detected") spec.hold = SweepHold::detected;
    else throw validation_error("hold must be injected|detected");
    if (auto t = o.number("theta_nrad")) spec.tilt = *t * 1e-9;
    // axis values: P_m (fraction), N (photons), tilt (nrad), waist (um)
    const double unit = spec.axis == SweepAxis::tilt ? 1e-9 : spec.axis == SweepAxis::waist ? 1e-6 : 1.0;
    const auto from = o.number("from"), to = o.number("to");
    if (!from || !to) throw validation_error("sweep needs --set from=... --set to=...");
    const double points = o.number("points").value_or(50);
    if (points < 2 || points != std::floor(points)) throw validation_error("points must be an integer >= 2");
    const std::string spacing = o.text("spacing").value_or("linear");
    if (spacing == "linear") spec.values = linspace(*from * unit, *to * unit, static_cast<std::size_t>(points));
    else if (spacing == "log") spec.values = logspace(*from * unit, *to * unit, static_cast<std::size_t>(points));
    else throw validation_error("spacing must be linear|log");
    const auto rows = sweep(spec, s);
    std::ostringstream text;
    if (json()) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& r : rows)
        arr.push_back({{"axis", r.axis}, {"snr_bhd", r.snr_bhd}, {"snr_sd", r.snr_sd}, {"mmt_bhd_rad", r.mmt_bhd},
                       {"mmt_sd_rad", r.mmt_sd}});
      text << arr.dump(2) << '\n';
    } else {
      io::write_sweep_csv(text, rows);
    }
    emit(text.str());
    return exit_ok;
  }

  ReproduceTolerances tolerances() const {
    ReproduceTolerances t;
    if (!opt_.defaults_path.empty()) {
      std::ifstream in(opt_.defaults_path);
      if (!in) throw validation_error("cannot open defaults file '" + opt_.defaults_path + "'");
      try {
        t = ReproduceTolerances::from_json(nlohmann::json::parse(in));
      } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("defaults file is not valid JSON: ") + e.what());
      }
    }
    return t;
  }

  int cmd_reproduce(const LabScenario& s, const Overrides& o) {
    o.reject_unknown({});
    auto tol = tolerances();
    const auto& t = opt_.target;
    if (opt_.tolerance) {
      const double v = *opt_.tolerance;
      if (!(v > 0.0)) throw validation_error("--tolerance must be positive");
      if (t == "table1") tol.table1_row = v;
      else if (t == "fig2") tol.fig2_mmt = v;
      else if (t == "fig4") tol.fig4_ratio = v;
      else if (t == "fig5") tol.fig5_ratio = v;
      else if (t == "fig6") tol.fig6_r_squared = 1.0 - v;
    }
    ReproduceReport rep;
    if (t == "table1") rep = reproduce::table1(records(), tol, s);
    else if (t == "fig2") rep = reproduce::fig2(tol);
    else if (t == "fig4") rep = reproduce::fig4(tol);
    else if (t == "fig5") rep = reproduce::fig5(tol);
    else if (t == "fig6") rep = reproduce::fig6(records(), tol);
    else throw validation_error("reproduce target must be fig2|fig4|fig5|fig6|table1");
    std::ostringstream report;
    if (json()) {
      nlohmann::ordered_json j{{"target", rep.target}, {"passed", rep.passed()}, {"checks", nlohmann::ordered_json::array()}};
      for (const auto& c : rep.checks)
        j["checks"].push_back(
            {{"name", c.name}, {"value", c.value}, {"target", c.target}, {"tolerance", c.tolerance}, {"pass", c.pass}});
      j["table"] = rep.table;
      emit(j.dump(2) + "\n");
    } else {
      emit(rep.table);
    }
    for (const auto& c : rep.checks)
      err_ << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << " (target " << c.target << ", tol "
           << c.tolerance << ")\n";
    err_ << rep.target << ": " << (rep.passed() ? "PASS" : "FAIL") << '\n';
    return rep.passed() ? exit_ok : exit_reproduction;
  }

  int cmd_montecarlo(const LabScenario& s, const Overrides& o) {
    o.reject_unknown(keys({&scenario_keys, &point_keys}, {"scheme", "model", "workers"}));
    const auto p = operating_point(s, o);
    if (!p.setting) throw validation_error("montecarlo needs pm > 0 (the weak value is sampled directly)");
    McConfig cfg;
    cfg.trials = opt_.trials;
    cfg.seed = opt_.seed;
    const std::string model = o.text("model").value_or("gaussian");
    if (model == "gaussian") cfg.model = PhotonModel::gaussian_quadrature;
    else if (model == "poisson") cfg.model = PhotonModel::poisson_counting;
    else throw validation_error("model must be gaussian|poisson");
    if (auto w = o.number("workers")) {
      if (*w < 0 || *w != std::floor(*w)) throw validation_error("workers must be a non-negative integer");
      cfg.workers = static_cast<unsigned>(*w);
    }
    const BeamGeometry& g = s.geometry;
    const double theta = p.theta.value_or(mmt_bhd(p.n_injected, *p.setting, g));
    const auto kick = TiltKick::from_tilt(theta, g);
    const auto budget = PhotonBudget::from_setting(p.n_injected, *p.setting, s.n_lo());
    if (budget.lo_warning()) err_ << "warning: LO photon number is below 100x the signal photon number\n";
    const std::string scheme = o.text("scheme").value_or("bhd");
    EmpiricalOutcome r;
    if (scheme == "bhd") r = simulate_bhd(cfg, budget, *p.setting, kick, g);
    else if (scheme == "sd") r = simulate_sd(cfg, budget, *p.setting, kick, g);
    else throw validation_error("scheme must be bhd|sd");
    emit(io::mc_summary_json(r).dump(2) + "\n");
    return exit_ok;
  }

  int cmd_calibrate(const LabScenario& s, const Overrides& o) {
    o.reject_unknown(keys({&scenario_keys}));
    const auto recs = records();
    const auto eff = fit_efficiency(recs, s);
    const auto piezo = fit_piezo_calibration(recs);
    std::ostringstream text;
    if (json()) {
      nlohmann::ordered_json j{{"efficiency", eff.eta},
                               {"row_efficiency", eff.row_efficiency},
                               {"efficiency_spread", eff.spread},
                               {"piezo_slope_rad_per_v", piezo.slope},
                               {"piezo_intercept_rad", piezo.intercept},
                               {"r_squared", piezo.r_squared}};
      text << j.dump(2) << '\n';
    } else {
      text << "efficiency,efficiency_spread,piezo_slope_nrad_per_mv,piezo_intercept_nrad,r_squared\n"
           << io::detail::fmt(eff.eta) << ',' << io::detail::fmt(eff.spread) << ','
           << io::detail::fmt(piezo.slope * 1e6) << ',' << io::detail::fmt(piezo.intercept * 1e9) << ','
           << io::detail::fmt(piezo.r_squared) << '\n';
    }
    emit(text.str());
    return exit_ok;
  }

  int cmd_optimize(const LabScenario& s, const Overrides& o) {
    o.reject_unknown(keys({&scenario_keys}, {"max_p_in_uw", "max_p_out_uw", "min_p_out_uw"}));
    OptimizationConstraints c;
    c.geometry = s.geometry;
    c.rbw = s.rbw;
    c.efficiency = s.efficiency;
    c.p_lo = s.p_lo;
    c.piezo_slope = s.piezo_slope;
    const auto max_in = o.number("max_p_in_uw");
    if (!max_in) throw validation_error("optimize needs --set max_p_in_uw=... (p_in must be bounded)");
    c.max_p_in = *max_in * 1e-6;
    c.max_p_out = o.number("max_p_out_uw").value_or(c.max_p_in * 1e6) * 1e-6;
    c.min_p_out = o.number("min_p_out_uw").value_or(1.0) * 1e-6;
    const auto r = optimize_mmt(c);
    nlohmann::ordered_json j{{"scenario", io::scenario_to_json(r.scenario)},
                             {"theta_min_nrad", r.prediction.theta_min * 1e9},
                             {"postselection_probability", r.scenario.postselection_probability()},
                             {"binding", r.binding}};
    if (json()) {
      emit(j.dump(2) + "\n");
    } else {
      std::ostringstream text;
      text << "p_in_uw,p_out_uw,postselection_probability,theta_min_nrad\n"
           << io::detail::fmt(r.scenario.p_in * 1e6) << ',' << io::detail::fmt(r.scenario.p_out * 1e6) << ','
           << io::detail::fmt(r.scenario.postselection_probability()) << ','
           << io::detail::fmt(r.prediction.theta_min * 1e9) << '\n';
      emit(text.str());
    }
    return exit_ok;
  }

  Options opt_;
  std::ostream& out_;
  std::ostream& err_;
};

/// Parses argv and runs. Diagnostics go to `err`, data to files or `out`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Weak-value-amplified tilt measurement calculator"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario_path, "Scenario JSON (SI units)");
    sub->add_option("--set", opt.sets, "Override key=value in lab units (repeatable)");
    sub->add_option("--out", opt.out_path, "Output file (default: stdout)");
    sub->add_option("--format", opt.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--dump-scenario", opt.dump_scenario, "Write the effective scenario JSON");
  };
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"mmt", "Minimum measurable tilt, BHD and split detection"},
                      {"snr", "SNR at a tilt, BHD and split detection"},
                      {"sweep", "Parameter sweep table"},
                      {"reproduce", "Reproduction suite: fig2|fig4|fig5|fig6|table1"},
                      {"montecarlo", "Shot-noise Monte Carlo"},
                      {"calibrate", "Fit efficiency and piezo slope from a records CSV"},
                      {"optimize", "Minimize the MMT under power constraints"}};
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    sub->callback([&opt, name = std::string(s.name)] { opt.subcommand = name; });
    const std::string n = s.name;
    if (n == "reproduce") {
      sub->add_option("target", opt.target, "fig2|fig4|fig5|fig6|table1")->required();
      sub->add_option("--tolerance", opt.tolerance, "Relative tolerance override");
      sub->add_option("--defaults", opt.defaults_path, "Tolerance defaults JSON");
    }
    if (n == "reproduce" || n == "calibrate") sub->add_option("--records", opt.records_path, "Records CSV");
    if (n == "montecarlo") {
      sub->add_option("--seed", opt.seed, "RNG seed");
      sub->add_option("--trials", opt.trials, "Number of trials")->check(CLI::PositiveNumber);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_validation;
  }
  try {
    return Runner(opt, out, err).run();
  } catch (const wvtilt::error& e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  }
}

}  // namespace wvtilt::cli
