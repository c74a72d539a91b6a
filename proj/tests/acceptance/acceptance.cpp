// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tunnelcatch/dynamics.hpp"
#include "tunnelcatch/eigensolve.hpp"
#include "tunnelcatch/oracle.hpp"
#include "tunnelcatch/scanner.hpp"
#include "tunnelcatch/semiclassic.hpp"
#include "tunnelcatch/squarewell.hpp"

using namespace tunnelcatch;

namespace {

constexpr double pi = numeric::pi;

DoubleWellSpec resonant(double hbar) {
  return {PhysicalWellSpec::harmonic_cap(1.5, 2.0, 0.0), {3.0, 1.0, 1.5}, hbar};
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Grid levels of an isolated square well; the physical well is parked far to
// the left and masked out.
std::vector<double> square_grid_levels(double v, double w, double hbar, double pad, double h, std::size_t count) {
  const DoubleWellSpec spec{PhysicalWellSpec::harmonic_cap(1.0, 1.0, -100.0), {0.0, w, v}, hbar};
  const Grid g = make_grid(-pad, w + pad, h, -0.5 * pad);
  const TridiagonalOperator op = discretize(spec, g, WellPart::Right);
  std::vector<double> e(count);
  for (std::size_t k = 0; k < count; ++k) e[k] = eigenvalue(op, k);
  return e;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int levels = 0;
  for (int draw = 0; draw < 50; ++draw) {
    const double v = 0.5 + 2.5 * u(rng);
    const double w = 0.3 + 1.7 * u(rng);
    const double hbar = 0.05 + 0.25 * u(rng);
    const auto exact = squarewell::solve_levels(v, w, hbar);
    // padding from the shallowest level's decay length, step from the
    // largest interior wave number
    const double kappa = std::sqrt(-exact.back().energy) / hbar;
    const double pad = std::max(1.0, 12.0 / kappa);
    const double h = 0.02 * hbar / std::sqrt(v);
    const auto coarse = square_grid_levels(v, w, hbar, pad, h, exact.size());
    const auto fine = square_grid_levels(v, w, hbar, pad, h / 2.0, exact.size());
    for (std::size_t k = 0; k < exact.size(); ++k) {
      worst = std::max(worst, std::abs(richardson(coarse[k], fine[k]) - exact[k].energy));
      ++levels;
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-4 && elapsed <= 60.0,
          format("50 draws, %d levels, max |dE| = %.3e (<= 1e-4), %.1f s (<= 60 s)", levels, worst, elapsed)};
}

Outcome criterion2() {
  const double e0 = squarewell::solve_levels(2.0, pi / 2.0, 1.0).at(0).energy;
  double worst_w = 0.0;
  for (int k = 0; k <= 5; ++k) {
    worst_w = std::max(worst_w, std::abs(squarewell::resonance_width(-1.0, 2.0, 1.0, k) - pi * (k + 0.5)));
  }
  const double err = std::abs(e0 + 1.0);
  return {err <= 1e-12 && worst_w <= 1e-12,
          format("|E0 + 1| = %.1e, max |w*_k - pi(k+1/2)| = %.1e for k <= 5 (<= 1e-12)", err, worst_w)};
}

Outcome criterion3() {
  auto gap = [](double hbar) {
    return std::abs(squarewell::level_asymptotic(1.5, 0.5, hbar, 0) - squarewell::solve_level(1.5, 0.5, hbar, 0).energy);
  };
  const double r1 = gap(0.02) / gap(0.01);
  const double r2 = gap(0.01) / gap(0.005);
  const bool ok = r1 >= 40.0 && r1 <= 90.0 && r2 >= 40.0 && r2 <= 90.0;
  return {ok, format("halving ratios %.2f, %.2f (in [40, 90]); series kept through hbar^3 term", r1, r2)};
}

struct LemmaPoint {
  double hbar = 0.0;
  double E_l = 0.0;
  double delta_wkb = 0.0;
  double Delta_grid = 0.0;
  double wronskian = 0.0;
  std::size_t near = 0;  // eigenvalues within 10 delta of E_l
};

LemmaPoint lemma_point(double hbar) {
  const oracle::TunedScenario ts = oracle::tune(resonant(hbar), oracle::GridOptions{});
  const TridiagonalOperator full = oracle::full_operator(ts);
  LemmaPoint p;
  p.hbar = hbar;
  p.E_l = ts.E_l;
  p.delta_wkb = wkb_delta(ts.spec, ts.barrier, ts.E_l, classical_frequency(ts.spec.left, ts.E_l));
  p.Delta_grid = oracle::split_pair(full, ts).Delta;
  p.wronskian = wronskian_delta(ts.left, ts.right, ts.barrier.c, hbar);
  p.near = eigenvalues_in(full, ts.E_l - 10.0 * p.delta_wkb, ts.E_l + 10.0 * p.delta_wkb).size();
  return p;
}

Outcome criterion4(const std::vector<LemmaPoint>& pts) {
  bool ok = true;
  std::string ratios;
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    const double ratio = p.Delta_grid / p.delta_wkb;
    ratios += format(" %.5f", ratio);
    ok = ok && std::abs(ratio - 1.0) < previous;
    previous = std::abs(ratio - 1.0);
  }
  const LemmaPoint& at = pts[2];  // hbar = 0.15
  const double ratio = at.Delta_grid / at.delta_wkb;
  ok = ok && at.near == 2 && ratio >= 0.5 && ratio <= 2.0;
  return {ok, format("hbar=0.15: %zu eigenvalues within 10 delta, Delta_grid/delta_wkb = %.5f; ratios over "
                     "hbar {0.25,0.2,0.15,0.12}:%s",
                     at.near, ratio, ratios.c_str())};
}

// The pair gap is resolved to a few long double ulps of |E|; a deviation
// below that floor carries no information about the trend.
double resolution_floor(const LemmaPoint& p) {
  const long double e = std::abs(static_cast<long double>(p.E_l));
  const long double ulp = std::nextafter(e, 2.0L * e) - e;
  return static_cast<double>(8.0L * ulp / p.Delta_grid);
}

Outcome criterion5(const std::vector<LemmaPoint>& pts) {
  std::string devs;
  bool improving = true;
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    const double dev = std::abs(p.wronskian / p.Delta_grid - 1.0);
    const double floor = resolution_floor(p);
    improving = improving && dev <= std::max(previous, floor);
    previous = dev;
    devs += format(" %.2e (floor %.1e)", dev, floor);
  }
  const LemmaPoint& at = pts[2];
  const double ratio = at.wronskian / at.Delta_grid;
  const bool ok = ratio >= 1.0 / 1.5 && ratio <= 1.5 && improving;
  return {ok, format("hbar=0.15: delta_wronskian/Delta_grid = %.10f; |ratio-1| over hbar {0.25,0.2,0.15,0.12}:%s",
                     ratio, devs.c_str())};
}

struct Propagation {
  double Delta_resonant = 0.0;
  double Delta = 0.0;
  double detuning = 0.0;
  double max_P_r = 0.0;
  double peak_time = 0.0;
  double drift = 0.0;
};

// Propagation over `periods` beat periods at a detuning given in units of
// the resonant grid splitting.
Propagation propagate(double hbar, double detuning_units, double periods) {
  const DoubleWellSpec base = resonant(hbar);
  const oracle::GridOptions opts;
  const auto at_resonance = oracle::tune(base, opts);
  Propagation out;
  out.Delta_resonant = oracle::split_pair(oracle::full_operator(at_resonance), at_resonance).Delta;
  const auto ts =
      detuning_units == 0.0 ? at_resonance : oracle::tune(base, opts, detuning_units * out.Delta_resonant);
  const TridiagonalOperator full = oracle::full_operator(ts);
  out.Delta = oracle::split_pair(full, ts).Delta;
  out.detuning = ts.detuning;
  const double t_final = periods * 2.0 * pi * hbar / out.Delta;
  const auto steps = static_cast<std::size_t>(std::ceil(t_final * out.Delta / hbar / 0.05));
  const OccupationTrace trace = grid_propagate(full, ts.left, t_final, steps, ts.grid.c_split);
  out.max_P_r = trace.max_P_r;
  out.peak_time = trace.transfer_time;
  for (double n : trace.norm) out.drift = std::max(out.drift, std::abs(n - trace.norm.front()));
  return out;
}

Outcome criterion6() {
  const double hbar = 0.15;
  const Propagation on = propagate(hbar, 0.0, 1.5);
  const Propagation off = propagate(hbar, 10.0, 1.0);
  const double t_ratio = on.peak_time / (pi * hbar / on.Delta);
  const bool ok = on.max_P_r >= 0.9 && std::abs(t_ratio - 1.0) <= 0.05 && on.drift <= 1e-9 && off.drift <= 1e-9 &&
                  off.max_P_r <= 0.02;
  return {ok, format("max P_r = %.6f, t_peak/(pi hbar/Delta_grid) = %.5f, drift = %.1e; at 10 delta max P_r = %.5f "
                     "(Lorentzian %.5f)",
                     on.max_P_r, t_ratio, std::max(on.drift, off.drift), off.max_P_r,
                     p_r_max(off.Delta_resonant, off.detuning))};
}

Outcome criterion7() {
  double worst = 0.0;
  std::string points;
  for (double x : {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0}) {
    const Propagation p = propagate(0.15, x, 1.0);
    const double predicted = p_r_max(p.Delta_resonant, p.detuning);
    worst = std::max(worst, std::abs(p.max_P_r - predicted));
    points += format(" %.3f/%.3f", p.max_P_r, predicted);
  }
  return {worst <= 0.05, format("max |measured - Lorentzian| = %.4f (<= 0.05); measured/predicted:%s", worst,
                                points.c_str())};
}

double grid_left_energy(const DoubleWellSpec& spec) { return oracle::estimate_left_energy(spec, oracle::GridOptions{}); }

Outcome criterion8() {
  const double hbar = 0.15;
  const DoubleWellSpec base = resonant(hbar);
  const double E_l = grid_left_energy(base);
  const double w0 = squarewell::resonance_width(E_l, 1.5, hbar, 0);
  const double w2 = squarewell::resonance_width(E_l, 1.5, hbar, 2);
  const ScanCurve curve = scan(base, ScanParameter::Width, 0.8 * w0, 1.1 * w2, 200, E_l, DeltaMethod::Wkb);
  bool ok = curve.peaks.size() == 3;
  std::string peaks;
  for (const auto& p : curve.peaks) {
    const double predicted = squarewell::resonance_width(E_l, 1.5, hbar, p.k);
    const double offset = std::abs(p.param_at_peak - predicted);
    const double fwhm = p.fwhm_energy / (2.0 * p.delta_at_peak);
    ok = ok && p.P_at_peak >= 0.99 && offset <= p.sample_spacing && std::abs(fwhm - 1.0) <= 0.1;
    peaks += format(" [k=%d P=%.8f |w-w*|=%.1e spacing=%.1e fwhm/2delta=%.4f]", p.k, p.P_at_peak, offset,
                    p.sample_spacing, fwhm);
  }
  return {ok, format("%zu peaks:%s", curve.peaks.size(), peaks.c_str())};
}

struct Inversion {
  double E_l = 0.0;
  double exact = 0.0;
  double series = 0.0;
  double delta = 0.0;
};

Inversion invert(double hbar, ScanParameter which, double fixed_w) {
  DoubleWellSpec base = resonant(hbar);
  Inversion out;
  out.E_l = grid_left_energy(base);
  Detection d;
  if (which == ScanParameter::Width) {
    const double w0 = squarewell::resonance_width(out.E_l, 1.5, hbar, 0);
    d = detect(base, which, 0.8 * w0, 1.2 * w0, 200, out.E_l, DeltaMethod::Wkb);
  } else {
    base.right.w = fixed_w;
    d = detect(base, which, 1.3, 2.5, 200, out.E_l, DeltaMethod::Wkb);
  }
  out.exact = d.energy.exact;
  out.series = d.energy.series;
  out.delta = d.peak.delta_at_peak;
  return out;
}

Outcome criterion9() {
  const double w_fixed = squarewell::resonance_width(grid_left_energy(resonant(0.15)), 1.5, 0.15, 0);
  bool ok = true;
  std::string loop;
  std::vector<double> depth_gap;
  std::vector<double> width_gap;
  for (double hbar : {0.2, 0.15, 0.1, 0.05}) {
    for (auto which : {ScanParameter::Width, ScanParameter::Depth}) {
      const Inversion inv = invert(hbar, which, w_fixed);
      const double err = std::abs(inv.exact - inv.E_l);
      ok = ok && err <= 2.0 * inv.delta;
      if (hbar == 0.15) loop += format(" %s |E-E_l|=%.1e (2 delta=%.1e)", to_string(which), err, 2.0 * inv.delta);
      if (hbar != 0.15) (which == ScanParameter::Depth ? depth_gap : width_gap).push_back(std::abs(inv.series - inv.exact));
    }
  }
  const double o1 = std::log2(depth_gap[0] / depth_gap[1]);
  const double o2 = std::log2(depth_gap[1] / depth_gap[2]);
  const double w1 = std::log2(width_gap[0] / width_gap[1]);
  const double w2 = std::log2(width_gap[1] / width_gap[2]);
  ok = ok && o1 >= 4.0 && o2 >= 4.0;
  return {ok, format("closed loop at hbar=0.15:%s; series-vs-exact order over hbar {0.2,0.1,0.05}: depth scan "
                     "(w fixed) %.2f, %.2f (>= 4); width scan %.2f, %.2f (informational)",
                     loop.c_str(), o1, o2, w1, w2)};
}

Outcome criterion10() {
  DoubleWellSpec spec = resonant(0.15);
  spec.right.b = 1.25;  // a = 1.2247
  const double E_l = grid_left_energy(spec);
  int refusals = 0;
  std::string how;
  auto expect_refusal = [&](const char* what, const std::function<void()>& f) {
    try {
      f();
      how += format(" %s:emitted", what);
    } catch (const Error& e) {
      const bool right_code = e.code() == ErrorCode::ValidityViolated || e.code() == ErrorCode::InvalidTwoLevel;
      refusals += right_code ? 1 : 0;
      how += format(" %s:%s", what, std::string(to_string(e.code())).c_str());
    }
  };
  const bool flagged = !check_separation(spec, E_l).valid;
  expect_refusal("wkb_delta", [&] { wkb_delta(spec, E_l, classical_frequency(spec.left, E_l)); });
  expect_refusal("scan", [&] { scan(spec, ScanParameter::Width, 0.5, 1.5, 50, E_l, DeltaMethod::Wkb); });
  expect_refusal("tune", [&] { oracle::tune(spec, oracle::GridOptions{}); });
  return {flagged && refusals == 3,
          format("b = 1.25: separation valid = %s;%s", flagged ? "false" : "true", how.c_str())};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* name, const std::function<Outcome()>& run) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };
  report(1, "square-well quantization vs grid", criterion1);
  report(2, "symmetric exactness", criterion2);
  report(3, "series order", criterion3);
  std::vector<LemmaPoint> lemma;
  report(4, "lemma pair and splitting", [&] {
    for (double hbar : {0.25, 0.2, 0.15, 0.12}) lemma.push_back(lemma_point(hbar));
    return criterion4(lemma);
  });
  report(5, "wronskian consistency", [&] {
    if (lemma.size() != 4) return Outcome{false, "lemma data unavailable"};
    return criterion5(lemma);
  });
  report(6, "dynamics", criterion6);
  report(7, "lorentzian law", criterion7);
  report(8, "width-scan peak structure", criterion8);
  report(9, "energy detection closed loop", criterion9);
  report(10, "validity gate", criterion10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
