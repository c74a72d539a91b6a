#pragma once

// Subcommands of the tunnelcatch tool. Each returns the process exit code:
// 0 ok, 2 input error, 3 numeric failure, 4 nothing found.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tunnelcatch/cli/scenario.hpp"
#include "tunnelcatch/dynamics.hpp"
#include "tunnelcatch/eigensolve.hpp"
#include "tunnelcatch/oracle.hpp"
#include "tunnelcatch/scanner.hpp"
#include "tunnelcatch/semiclassic.hpp"
#include "tunnelcatch/squarewell.hpp"

namespace tunnelcatch::cli {

enum ExitCode : int { Ok = 0, InputError = 2, NumericFailure = 3, NotFound = 4 };

/// Command-line values that take precedence over the scenario file.
struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<ScanParameter> param;
  std::optional<std::pair<double, double>> range;
  std::optional<std::size_t> samples;
  std::optional<EvolveMethod> method;
  std::optional<DeltaMethod> delta_method;
  std::optional<double> hbar;
  std::optional<double> t_final;
  std::optional<std::size_t> steps;
  std::optional<double> detuning;
};

inline void apply(Scenario& sc, const Overrides& o) {
  if (o.hbar) {
    if (!(*o.hbar > 0.0)) throw ScenarioError("--hbar must be positive");
    sc.spec.hbar = *o.hbar;
  }
  if (o.param) sc.scan.param = *o.param;
  if (o.range) {
    sc.scan.lo = o.range->first;
    sc.scan.hi = o.range->second;
  }
  if (o.samples) sc.scan.samples = *o.samples;
  if (o.delta_method) sc.scan.delta_method = *o.delta_method;
  if (o.method) sc.evolve.method = *o.method;
  if (o.t_final) sc.evolve.t_final = *o.t_final;
  if (o.steps) sc.evolve.steps = *o.steps;
  if (o.detuning) sc.evolve.detuning = *o.detuning;
}

/// "lo:hi" into a pair.
inline std::pair<double, double> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ScenarioError("--range must look like lo:hi, got \"" + s + "\"");
  try {
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const std::string a = s.substr(0, colon);
    const std::string b = s.substr(colon + 1);
    const double lo = std::stod(a, &used_lo);
    const double hi = std::stod(b, &used_hi);
    if (used_lo != a.size() || used_hi != b.size()) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ScenarioError("--range must look like lo:hi, got \"" + s + "\"");
  }
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

inline oracle::GridOptions grid_options(const Scenario& sc) {
  oracle::GridOptions o;
  o.h = sc.grid_step;
  o.padding = sc.padding;
  o.left_level = sc.left_level;
  o.right_level = sc.right_level;
  return o;
}

/// E_l for scan and detect: the scenario's `run.energy`, otherwise the grid
/// state `left_level` of the isolated physical well.
inline double left_energy(const Scenario& sc) {
  if (sc.energy) return *sc.energy;
  return oracle::estimate_left_energy(sc.spec, grid_options(sc));
}

struct SpectrumReport {
  std::vector<squarewell::SquareWellLevel> square_analytic;
  std::vector<double> square_grid;  // NaN where the grid has fewer bound states
  std::vector<double> left_grid;
  Grid grid;
  double E_l = 0.0;
  int nearest_k = 0;
  double E_r = 0.0;
  double detuning = 0.0;
  double delta_wkb = 0.0;
  double delta_wronskian = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
  double Delta_grid = 0.0;
  double Delta_two_level = 0.0;
  std::optional<std::string> refused;  // why two-level numbers were withheld
};

/// Isolated-well spectra on one grid, then the double-well pair next to the
/// two-level prediction. The grid is built around the estimated E_l with the
/// split point at the barrier center (the midpoint of [a, b] when the
/// barrier center is unusable).
inline SpectrumReport compute_spectrum(const Scenario& sc) {
  const DoubleWellSpec& spec = sc.spec;
  SpectrumReport r;
  r.square_analytic = squarewell::solve_levels(spec.right.v, spec.right.w, spec.hbar);

  const double E_est = oracle::estimate_left_energy(spec, grid_options(sc));
  std::optional<BarrierData> barrier;
  try {
    barrier = barrier_center(spec, E_est);
  } catch (const Error& e) {
    r.refused = e.what();
  }
  const double c = barrier && barrier->valid_two_level ? barrier->c : 0.5 * (spec.a() + spec.right.b);
  r.grid = make_grid(spec, E_est, sc.grid_step, sc.padding, c);

  const TridiagonalOperator right_op = discretize(spec, r.grid, WellPart::Right);
  const std::size_t right_bound = right_op.count_below(0.0);
  for (std::size_t k = 0; k < r.square_analytic.size(); ++k) {
    r.square_grid.push_back(k < right_bound ? eigenvalue(right_op, k) : std::nan(""));
  }
  const TridiagonalOperator left_op = discretize(spec, r.grid, WellPart::Left);
  const std::size_t left_bound = left_op.count_below(0.0);
  if (left_bound <= sc.left_level) {
    throw Error(ErrorCode::NotEnoughBoundStates, "physical well has no level " + std::to_string(sc.left_level));
  }
  for (std::size_t n = 0; n < std::min(left_bound, sc.left_level + 3); ++n) r.left_grid.push_back(eigenvalue(left_op, n));
  r.E_l = r.left_grid[sc.left_level];

  // two-level part: refused when the wells are too close
  if (!r.refused) {
    barrier = barrier_center(spec, r.E_l);
    if (!barrier->valid_two_level) {
      r.refused = "barrier center c = " + fmt(barrier->c) + " is not inside (a, b): probing well too close";
    }
  }
  if (r.refused) return r;

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < right_bound; ++k) {
    const double e = eigenvalue(right_op, k);
    if (std::abs(e - r.E_l) < best) {
      best = std::abs(e - r.E_l);
      r.nearest_k = static_cast<int>(k);
      r.E_r = e;
    }
  }
  r.detuning = r.E_r - r.E_l;
  r.delta_wkb = wkb_delta(spec, *barrier, r.E_l, classical_frequency(spec.left, r.E_l));
  Grid g = r.grid;
  g.c_split = barrier->c;
  const TridiagonalOperator left_c = discretize(spec, g, WellPart::Left);
  const TridiagonalOperator right_c = discretize(spec, g, WellPart::Right);
  const BoundState psi_l = eigenvector(left_c, r.E_l);
  const BoundState psi_r = eigenvector(right_c, r.E_r);
  r.delta_wronskian = wronskian_delta(psi_l, psi_r, barrier->c, spec.hbar);

  const TridiagonalOperator full = discretize(spec, r.grid);
  const std::size_t below = full.count_below(0.5 * (r.E_l + r.E_r));
  if (below == 0) throw Error(ErrorCode::NotEnoughBoundStates, "no double-well level below the pair center");
  r.E1 = eigenvalue(full, below - 1);
  r.E2 = eigenvalue(full, below);
  r.Delta_grid = pair_gap(full, below - 1, r.E1, r.E2);
  r.Delta_two_level = two_level_spectrum(r.E_l, r.E_r, r.delta_wkb).Delta;
  return r;
}

namespace detail {

inline std::filesystem::path out_path(const Overrides& o, const char* name) {
  const std::filesystem::path dir = o.out_dir.value_or(".");
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ScenarioError("cannot write '" + path.string() + "'");
  body(f);
}

inline nlohmann::json peak_json(const PeakRecord& p) {
  return {{"k", p.k},
          {"param_at_peak", p.param_at_peak},
          {"predicted_param", p.predicted_param},
          {"P_at_peak", p.P_at_peak},
          {"fwhm_param", p.fwhm_param},
          {"fwhm_energy", p.fwhm_energy},
          {"delta", p.delta_at_peak},
          {"sample_spacing", p.sample_spacing},
          {"linearized", p.linearized}};
}

inline ScanCurve run_scan(const Scenario& sc, double E_l) {
  if (!sc.scan.lo || !sc.scan.hi) throw ScenarioError("no scan range: give --range lo:hi or run.scan.range");
  if (!(*sc.scan.hi > *sc.scan.lo)) {
    throw ScenarioError("empty scan range " + fmt(*sc.scan.lo) + ":" + fmt(*sc.scan.hi));
  }
  if (sc.scan.samples < 2) throw ScenarioError("need at least 2 scan samples");
  ScanOptions opts;
  opts.grid_step = sc.grid_step;
  opts.padding = sc.padding;
  return scan(sc.spec, sc.scan.param, *sc.scan.lo, *sc.scan.hi, sc.scan.samples, E_l, sc.scan.delta_method, opts);
}

}  // namespace detail

inline int cmd_spectrum(const Scenario& sc, const Overrides& o, std::ostream& out, std::ostream& err) {
  const SpectrumReport r = compute_spectrum(sc);
  out << "# square well v=" << fmt(sc.spec.right.v) << " w=" << fmt(sc.spec.right.w) << " hbar=" << fmt(sc.spec.hbar)
      << "\n";
  out << "k,E_analytic,E_grid,residual\n";
  for (std::size_t k = 0; k < r.square_analytic.size(); ++k) {
    out << k << "," << fmt(r.square_analytic[k].energy) << "," << fmt(r.square_grid[k]) << ","
        << fmt(r.square_analytic[k].residual) << "\n";
  }
  out << "# physical well, grid h=" << fmt(r.grid.h) << " n=" << r.grid.n << "\n";
  out << "n,E_grid\n";
  for (std::size_t n = 0; n < r.left_grid.size(); ++n) out << n << "," << fmt(r.left_grid[n]) << "\n";
  if (o.out_dir) {
    detail::write_file(detail::out_path(o, "spectrum_square.csv"), [&](std::ostream& f) {
      f << "k,E_analytic,E_grid\n";
      for (std::size_t k = 0; k < r.square_analytic.size(); ++k) {
        f << k << "," << fmt(r.square_analytic[k].energy) << "," << fmt(r.square_grid[k]) << "\n";
      }
    });
  }
  if (r.refused) {
    err << "two-level predictions refused (ValidityViolated): " << *r.refused << "\n";
    return NumericFailure;
  }
  out << "# double well\n";
  out << "E_l,k,E_r,detuning,delta_wkb,delta_wronskian,E1,E2,Delta_grid,Delta_two_level,ratio\n";
  out << fmt(r.E_l) << "," << r.nearest_k << "," << fmt(r.E_r) << "," << fmt(r.detuning) << "," << fmt(r.delta_wkb)
      << "," << fmt(r.delta_wronskian) << "," << fmt(r.E1) << "," << fmt(r.E2) << "," << fmt(r.Delta_grid) << ","
      << fmt(r.Delta_two_level) << "," << fmt(r.Delta_grid / r.Delta_two_level) << "\n";
  return Ok;
}

inline int cmd_scan(const Scenario& sc, const Overrides& o, std::ostream& out, std::ostream&) {
  const double E_l = left_energy(sc);
  const ScanCurve curve = detail::run_scan(sc, E_l);
  detail::write_file(detail::out_path(o, "scan_curve.csv"), [&](std::ostream& f) { write_curve_csv(f, curve); });
  nlohmann::json report = {{"parameter", to_string(curve.parameter)},
                           {"delta_method", to_string(curve.method)},
                           {"E_l", E_l},
                           {"hbar", sc.spec.hbar},
                           {"range", {curve.lo, curve.hi}},
                           {"samples", curve.samples.size()},
                           {"peaks", nlohmann::json::array()}};
  for (const auto& p : curve.peaks) report["peaks"].push_back(detail::peak_json(p));
  detail::write_file(detail::out_path(o, "scan_peaks.json"), [&](std::ostream& f) { f << report.dump(2) << "\n"; });

  out << "# scan over " << to_string(curve.parameter) << " [" << fmt(curve.lo) << ", " << fmt(curve.hi)
      << "], E_l=" << fmt(E_l) << ", " << curve.samples.size() << " samples\n";
  out << "k,param_at_peak,predicted_param,P_at_peak,fwhm_energy,delta\n";
  for (const auto& p : curve.peaks) {
    out << p.k << "," << fmt(p.param_at_peak) << "," << fmt(p.predicted_param) << "," << fmt(p.P_at_peak) << ","
        << fmt(p.fwhm_energy) << "," << fmt(p.delta_at_peak) << "\n";
  }
  return Ok;
}

inline int cmd_evolve(const Scenario& sc, const Overrides& o, std::ostream& out, std::ostream&) {
  const DoubleWellSpec& spec = sc.spec;
  OccupationTrace trace;
  double predicted_transfer = 0.0;
  double tuned_w = 0.0;
  std::string extra;
  const int k = static_cast<int>(sc.right_level);
  if (sc.evolve.method == EvolveMethod::TwoLevel) {
    // the probing well is placed so that E_r = E_l + detuning * delta
    const double E_l = left_energy(sc);
    DoubleWellSpec s = spec;
    s.right.w = squarewell::resonance_width(E_l, spec.right.v, spec.hbar, k);
    const BarrierData barrier = barrier_center(s, E_l);
    const double delta = wkb_delta(s, barrier, E_l, classical_frequency(spec.left, E_l));
    const double E_r = E_l + sc.evolve.detuning * delta;
    tuned_w = squarewell::resonance_width(E_r, spec.right.v, spec.hbar, k);
    const TwoLevelResult tl = two_level_spectrum(E_l, E_r, delta);
    predicted_transfer = numeric::pi * spec.hbar / tl.Delta;
    const double t_final = sc.evolve.t_final.value_or(predicted_transfer);
    const std::size_t steps = sc.evolve.steps.value_or(1000);
    if (!(t_final > 0.0) || steps == 0) throw ScenarioError("need t_final > 0 and steps > 0");
    std::vector<double> times(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) times[i] = t_final * static_cast<double>(i) / static_cast<double>(steps);
    trace = occupation_probabilities(tl, tl.alpha, times, spec.hbar);
  } else {
    const oracle::GridOptions go = grid_options(sc);
    double detuning = 0.0;
    if (sc.evolve.detuning != 0.0) {
      // detuning is measured in units of the resonant grid splitting
      const oracle::TunedScenario at_resonance = oracle::tune(spec, go);
      detuning = sc.evolve.detuning * oracle::split_pair(oracle::full_operator(at_resonance), at_resonance).Delta;
    }
    const oracle::TunedScenario ts = oracle::tune(spec, go, detuning);
    tuned_w = ts.spec.right.w;
    const TridiagonalOperator full = oracle::full_operator(ts);
    const oracle::SplitPair pair = oracle::split_pair(full, ts);
    predicted_transfer = numeric::pi * spec.hbar / pair.Delta;
    const double t_final = sc.evolve.t_final.value_or(2.0 * predicted_transfer);
    const auto default_steps = static_cast<std::size_t>(std::ceil(t_final * pair.Delta / spec.hbar / 0.05));
    const std::size_t steps = sc.evolve.steps.value_or(default_steps);
    if (!(t_final > 0.0) || steps == 0) throw ScenarioError("need t_final > 0 and steps > 0");
    trace = grid_propagate(full, ts.left, t_final, steps, ts.grid.c_split);
    extra = "contamination <psi0,psi_r>=" + fmt(inner_product(ts.left, ts.right)) + "\n";
  }
  const char* name = sc.evolve.method == EvolveMethod::TwoLevel ? "evolve_two_level.csv" : "evolve_grid.csv";
  detail::write_file(detail::out_path(o, name), [&](std::ostream& f) { write_trace_csv(f, trace); });
  double drift = 0.0;
  for (double n : trace.norm) drift = std::max(drift, std::abs(n - trace.norm.front()));
  out << "# evolve " << (sc.evolve.method == EvolveMethod::TwoLevel ? "two_level" : "grid") << ", w=" << fmt(tuned_w)
      << "\n";
  out << "max_P_r=" << fmt(trace.max_P_r) << "\n";
  out << "final_P_r=" << fmt(trace.P_r.back()) << "\n";
  out << "transfer_time=" << fmt(trace.transfer_time) << " predicted=" << fmt(predicted_transfer) << "\n";
  out << "norm_drift=" << fmt(drift) << "\n" << extra;
  return Ok;
}

inline int cmd_detect(const Scenario& sc, const Overrides& o, std::ostream& out, std::ostream&) {
  const double E_l = left_energy(sc);
  if (!sc.scan.lo || !sc.scan.hi) throw ScenarioError("no scan range: give --range lo:hi or run.scan.range");
  if (!(*sc.scan.hi > *sc.scan.lo)) throw ScenarioError("empty scan range");
  ScanOptions opts;
  opts.grid_step = sc.grid_step;
  opts.padding = sc.padding;
  const Detection d =
      detect(sc.spec, sc.scan.param, *sc.scan.lo, *sc.scan.hi, sc.scan.samples, E_l, sc.scan.delta_method, opts);
  const double error = std::abs(d.energy.exact - E_l);
  const double tolerance = 2.0 * d.peak.delta_at_peak;
  nlohmann::json report = {{"parameter", to_string(d.curve.parameter)},
                           {"first_peak", detail::peak_json(d.peak)},
                           {"started_off_resonance", d.started_off_resonance},
                           {"E_exact", d.energy.exact},
                           {"E_series", d.energy.series},
                           {"E_l", E_l},
                           {"abs_error", error},
                           {"two_delta", tolerance},
                           {"within_two_delta", error <= tolerance}};
  detail::write_file(detail::out_path(o, "detect.json"), [&](std::ostream& f) { f << report.dump(2) << "\n"; });
  out << "# detect over " << to_string(d.curve.parameter) << " [" << fmt(d.curve.lo) << ", " << fmt(d.curve.hi)
      << "]\n";
  out << "first_peak_param=" << fmt(d.peak.param_at_peak) << "\n";
  out << "E_exact=" << fmt(d.energy.exact) << "\n";
  out << "E_series=" << fmt(d.energy.series) << "\n";
  out << "E_l=" << fmt(E_l) << "\n";
  out << "abs_error=" << fmt(error) << " two_delta=" << fmt(tolerance)
      << (error <= tolerance ? " within" : " OUTSIDE") << "\n";
  if (!d.started_off_resonance) out << "warning: scan did not start off resonance\n";
  return Ok;
}

/// Runs a command and turns failures into exit codes with a diagnostic.
inline int guarded(const std::function<int()>& command, std::ostream& err) {
  try {
    return command();
  } catch (const ScenarioError& e) {
    err << "input error: " << e.what() << "\n";
    return InputError;
  } catch (const Error& e) {
    err << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::InvalidArgument:
        return InputError;
      case ErrorCode::NoPeakFound:
      case ErrorCode::NotFirstPeak:
        return NotFound;
      default:
        return NumericFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return NumericFailure;
  }
}

}  // namespace tunnelcatch::cli
