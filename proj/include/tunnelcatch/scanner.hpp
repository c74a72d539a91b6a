#pragma once

// Resonance scans of P_r^max over the probing-well width or depth, peak
// extraction, and inference of the physical-well energy from the first peak.
//
// Peaks are exponentially narrow in the parameter, so a uniform pass only
// locates them: the per-level detuning D_k(p) = E_r^(k)(p) - E_l changes sign
// between two samples, bisection finds the zero, and a window of samples
// spaced in units of the Lorentzian half width delta / |D'| is laid around it.
// When that half width is below the resolution of a double near the peak the
// window samples keep the rounded parameter and take their detuning from the
// local slope; such samples are flagged `linearized`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "tunnelcatch/dynamics.hpp"
#include "tunnelcatch/eigensolve.hpp"
#include "tunnelcatch/error.hpp"
#include "tunnelcatch/model.hpp"
#include "tunnelcatch/numeric.hpp"
#include "tunnelcatch/semiclassic.hpp"
#include "tunnelcatch/squarewell.hpp"

namespace tunnelcatch {

enum class ScanParameter { Width, Depth };
enum class DeltaMethod { Wkb, Wronskian };

inline const char* to_string(ScanParameter p) { return p == ScanParameter::Width ? "width" : "depth"; }
inline const char* to_string(DeltaMethod m) { return m == DeltaMethod::Wkb ? "wkb" : "wronskian"; }

struct ScanSample {
  double param = 0.0;
  double p_r_max = 0.0;
  double Delta = 0.0;
  double delta = 0.0;
  double detuning = 0.0;  // E_r - E_l for the nearest level
  double E_r = 0.0;
  int k = 0;
  bool linearized = false;
  double window_offset = 0.0;  // position in half widths inside a peak window, 0 elsewhere
};

struct PeakRecord {
  int k = 0;
  double param_at_peak = 0.0;
  double predicted_param = 0.0;
  double P_at_peak = 0.0;
  double fwhm_param = 0.0;
  double fwhm_energy = 0.0;
  double delta_at_peak = 0.0;
  double sample_spacing = 0.0;  // parameter spacing of the samples at the peak
  bool linearized = false;
};

struct ScanOptions {
  std::size_t threads = 0;        // 0: hardware concurrency, capped by TUNNELCATCH_THREADS
  double window_half_span = 8.0;  // window extent in half widths
  double window_step = 0.2;       // window spacing in half widths
  double threshold = 0.5;         // peak acceptance level for find_peaks
  double off_resonance = 0.01;    // P_r^max below this counts as no catch
  // grid used by the Wronskian coupling
  double grid_step = 1e-3;
  double padding = 2.0;
};

struct ScanCurve {
  ScanParameter parameter = ScanParameter::Width;
  DeltaMethod method = DeltaMethod::Wkb;
  DoubleWellSpec base;
  double E_l = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<ScanSample> samples;
  std::vector<PeakRecord> peaks;
};

namespace detail {

inline std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested != 0 ? requested : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TUNNELCATCH_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

// fn(i) for i in [0, count) on contiguous chunks. Results must be written by
// index; the first failing index (not the first failing thread) is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t requested_threads, Fn&& fn) {
  if (count == 0) return;
  const std::size_t workers = worker_count(requested_threads, count);
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0, count);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline DoubleWellSpec with_param(const DoubleWellSpec& base, ScanParameter which, double p) {
  DoubleWellSpec s = base;
  if (which == ScanParameter::Width) {
    s.right.w = p;
  } else {
    s.right.v = p;
  }
  return s;
}

// E_r^(k) - E_l, continued by -E_l where level k does not exist yet (the
// level enters the well at E = 0, so this is continuous in the parameter).
inline double level_detuning(const SquareWellSpec& r, double hbar, int k, double E_l) {
  if (k >= squarewell::level_count(r.v, r.w, hbar)) return -E_l;
  return squarewell::solve_level(r.v, r.w, hbar, k).energy - E_l;
}

struct NearestLevel {
  int k = 0;
  double E_r = 0.0;
};

inline NearestLevel nearest_level(const SquareWellSpec& r, double hbar, double E_l) {
  const int n = squarewell::level_count(r.v, r.w, hbar);
  NearestLevel best{0, squarewell::solve_level(r.v, r.w, hbar, 0).energy};
  for (int k = 1; k < n; ++k) {
    const double e = squarewell::solve_level(r.v, r.w, hbar, k).energy;
    if (std::abs(e - E_l) < std::abs(best.E_r - E_l)) best = {k, e};
    if (e > E_l) break;  // levels increase with k
  }
  return best;
}

// Coupling between the left state at E_l and square-well level k. The
// barrier only depends on the left well, b and E_l, so it is built once.
class CouplingModel {
 public:
  // `sizing` must contain the widest probing well of the scan.
  CouplingModel(const DoubleWellSpec& sizing, double E_l, DeltaMethod method, const ScanOptions& opts)
      : E_l_(E_l), method_(method) {
    barrier_ = barrier_center(sizing, E_l);
    omega_ = classical_frequency(sizing.left, E_l);
    if (method == DeltaMethod::Wronskian) {
      grid_ = make_grid(sizing, E_l, opts.grid_step, opts.padding, barrier_.c);
      const TridiagonalOperator left_op = discretize(sizing, grid_, WellPart::Left);
      // grid state closest to E_l
      const std::size_t below = left_op.count_below(E_l);
      std::size_t index = below;
      if (below > 0) {
        const double under = eigenvalue(left_op, below - 1);
        const double over = eigenvalue(left_op, below);
        index = std::abs(under - E_l) <= std::abs(over - E_l) ? below - 1 : below;
      }
      left_ = eigenvector(left_op, eigenvalue(left_op, index));
    }
  }

  const BarrierData& barrier() const { return barrier_; }

  double operator()(const DoubleWellSpec& s, int k) const {
    if (!(s.right.v + E_l_ > 0.0)) return 0.0;
    if (method_ == DeltaMethod::Wkb) return wkb_delta(s, barrier_, E_l_, omega_);
    const TridiagonalOperator right_op = discretize(s, grid_, WellPart::Right);
    if (right_op.count_below(0.0) <= static_cast<std::size_t>(k)) return 0.0;
    const BoundState right = eigenvector(right_op, eigenvalue(right_op, static_cast<std::size_t>(k)));
    return wronskian_delta(left_, right, barrier_.c, s.hbar);
  }

 private:
  double E_l_;
  DeltaMethod method_;
  BarrierData barrier_;
  double omega_ = 0.0;
  Grid grid_;
  BoundState left_;
};

// Half-maximum crossing between a sample above and one below by linear
// interpolation; returns {param, detuning}.
inline std::pair<double, double> half_crossing(const ScanSample& above, const ScanSample& below, double half) {
  const double f = (above.p_r_max - half) / (above.p_r_max - below.p_r_max);
  return {above.param + f * (below.param - above.param), above.detuning + f * (below.detuning - above.detuning)};
}

inline ScanSample finish_sample(double param, int k, double E_r, double detuning, double delta) {
  ScanSample s;
  s.param = param;
  s.k = k;
  s.E_r = E_r;
  s.detuning = detuning;
  s.delta = delta;
  s.Delta = std::hypot(delta, detuning);
  s.p_r_max = delta > 0.0 ? p_r_max(delta, detuning) : 0.0;
  return s;
}

inline ScanSample sample_level(const DoubleWellSpec& s, double param, int k, double E_l, const CouplingModel& coupling) {
  const double E_r = squarewell::solve_level(s.right.v, s.right.w, s.hbar, k).energy;
  return finish_sample(param, k, E_r, E_r - E_l, coupling(s, k));
}

inline double predicted_param(const ScanCurve& curve, int k) {
  try {
    if (curve.parameter == ScanParameter::Width) {
      return squarewell::resonance_width(curve.E_l, curve.base.right.v, curve.base.hbar, k);
    }
    return squarewell::resonance_depth(curve.E_l, curve.base.right.w, curve.base.hbar, k).exact;
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace detail

/// P_r^max of the nearest square-well level at one parameter value.
inline ScanSample scan_point(const DoubleWellSpec& base, ScanParameter which, double param, double E_l,
                             const detail::CouplingModel& coupling) {
  const DoubleWellSpec s = detail::with_param(base, which, param);
  const auto nearest = detail::nearest_level(s.right, s.hbar, E_l);
  return detail::finish_sample(param, nearest.k, nearest.E_r, nearest.E_r - E_l, coupling(s, nearest.k));
}

/// Peaks of a sampled curve above `threshold`. The center is refined from the
/// zero of the detuning when it changes sign inside the peak, otherwise from a
/// parabola through the top three samples; widths are half-maximum crossings
/// in the parameter and in detuning.
inline std::vector<PeakRecord> find_peaks(const std::vector<ScanSample>& samples, double threshold = 0.5) {
  std::vector<PeakRecord> peaks;
  const std::size_t n = samples.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && !(samples[i].p_r_max > threshold)) ++i;
    if (i >= n) break;
    std::size_t best = i;
    while (i < n && samples[i].p_r_max > threshold) {
      if (samples[i].p_r_max > samples[best].p_r_max) best = i;
      ++i;
    }
    const ScanSample& top = samples[best];
    PeakRecord peak;
    peak.k = top.k;
    peak.delta_at_peak = top.delta;
    peak.linearized = top.linearized;
    peak.param_at_peak = top.param;
    peak.P_at_peak = top.p_r_max;
    const std::size_t run_begin = [&] {
      std::size_t b = best;
      while (b > 0 && samples[b - 1].p_r_max > threshold) --b;
      return b;
    }();
    // P_r^max reaches its maximum where the detuning vanishes, so a sign
    // change of the detuning inside the peak pins the center directly
    std::optional<double> zero;
    for (std::size_t j = run_begin; j + 1 < i && !zero; ++j) {
      const double d0 = samples[j].detuning;
      const double d1 = samples[j + 1].detuning;
      if (d0 == 0.0) {
        zero = samples[j].param;
      } else if (d1 == 0.0) {
        zero = samples[j + 1].param;
      } else if ((d0 > 0.0) != (d1 > 0.0)) {
        zero = samples[j].param + d0 / (d0 - d1) * (samples[j + 1].param - samples[j].param);
      }
    }
    if (best > 0 && best + 1 < n) {
      const ScanSample& l = samples[best - 1];
      const ScanSample& r = samples[best + 1];
      peak.sample_spacing = 0.5 * (r.param - l.param);
      if (zero) {
        peak.param_at_peak = *zero;
      } else if (l.param < top.param && top.param < r.param) {
        const auto [x, y] = detail::parabolic_peak(l.param, l.p_r_max, top.param, top.p_r_max, r.param, r.p_r_max);
        peak.param_at_peak = x;
        peak.P_at_peak = std::clamp(y, top.p_r_max, 1.0);
      }
    }
    const double half = 0.5 * top.p_r_max;
    std::size_t a = best;
    while (a > 0 && samples[a - 1].p_r_max >= half) --a;
    std::size_t b = best;
    while (b + 1 < n && samples[b + 1].p_r_max >= half) ++b;
    if (a > 0 && b + 1 < n) {
      const auto left = detail::half_crossing(samples[a], samples[a - 1], half);
      const auto right = detail::half_crossing(samples[b], samples[b + 1], half);
      peak.fwhm_param = right.first - left.first;
      peak.fwhm_energy = std::abs(right.second - left.second);
    }
    peaks.push_back(peak);
  }
  return peaks;
}

/// find_peaks on a scan, with each peak's predicted parameter filled in.
inline std::vector<PeakRecord> find_peaks(const ScanCurve& curve, double threshold = 0.5) {
  auto peaks = find_peaks(curve.samples, threshold);
  for (auto& p : peaks) p.predicted_param = detail::predicted_param(curve, p.k);
  return peaks;
}

/// Scan of P_r^max over [lo, hi]: n uniform samples plus a refined window
/// around every zero of a level detuning. Throws ValidityViolated when the
/// probing well is too close to the physical well at E_l.
inline ScanCurve scan(const DoubleWellSpec& base, ScanParameter which, double lo, double hi, std::size_t n,
                      double E_l, DeltaMethod method, const ScanOptions& opts = {}) {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi) || n < 2) {
    throw Error(ErrorCode::InvalidArgument, "scan needs 0 < lo < hi and at least 2 samples");
  }
  if (!(opts.window_step > 0.0) || !(opts.window_half_span >= opts.window_step)) {
    throw Error(ErrorCode::InvalidArgument, "bad refinement window");
  }
  // widest and deepest probing well of the scan
  const DoubleWellSpec sizing = detail::with_param(base, which, hi);
  validate(sizing);
  const SeparationCheck sep = check_separation(sizing, E_l);
  if (!sep.valid) {
    throw Error(ErrorCode::ValidityViolated,
                "probing well too close to the physical well: margin " + std::to_string(sep.margin));
  }
  const detail::CouplingModel coupling(sizing, E_l, method, opts);

  ScanCurve curve;
  curve.parameter = which;
  curve.method = method;
  curve.base = base;
  curve.E_l = E_l;
  curve.lo = lo;
  curve.hi = hi;

  // round 1: uniform pass, plus every level detuning for crossing detection
  const int levels = squarewell::level_count(sizing.right.v, sizing.right.w, sizing.hbar);
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  std::vector<ScanSample> coarse(n);
  std::vector<std::vector<double>> detunings(n, std::vector<double>(static_cast<std::size_t>(levels)));
  detail::parallel_for(n, opts.threads, [&](std::size_t i) {
    coarse[i] = scan_point(base, which, grid[i], E_l, coupling);
    const DoubleWellSpec s = detail::with_param(base, which, grid[i]);
    for (int k = 0; k < levels; ++k) {
      detunings[i][static_cast<std::size_t>(k)] = detail::level_detuning(s.right, s.hbar, k, E_l);
    }
  });

  // round 2: locate zeros of the (decreasing) level detunings
  struct Crossing {
    int k;
    double lo;
    double hi;
    bool exact_at_hi;
    double root = 0.0;
    double slope = 0.0;
    double delta = 0.0;
  };
  std::vector<Crossing> crossings;
  for (int k = 0; k < levels; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (detunings[i][kk] > 0.0 && detunings[i + 1][kk] <= 0.0) {
        crossings.push_back({k, grid[i], grid[i + 1], detunings[i + 1][kk] == 0.0});
      }
    }
  }
  detail::parallel_for(crossings.size(), opts.threads, [&](std::size_t c) {
    Crossing& x = crossings[c];
    auto D = [&](double p) {
      const DoubleWellSpec s = detail::with_param(base, which, p);
      return detail::level_detuning(s.right, s.hbar, x.k, E_l);
    };
    numeric::RootOptions ro;
    ro.x_tolerance = 0.0;
    x.root = x.exact_at_hi ? x.hi : numeric::find_root(D, x.lo, x.hi, ro);
    const double step = 1e-6 * std::max(std::abs(x.root), 1e-3);
    x.slope = (D(x.root + step) - D(x.root - step)) / (2.0 * step);
    x.delta = coupling(detail::with_param(base, which, x.root), x.k);
  });

  // round 3: Lorentzian windows
  const int half_count = static_cast<int>(std::lround(opts.window_half_span / opts.window_step));
  const std::size_t per_window = static_cast<std::size_t>(2 * half_count + 1);
  std::vector<ScanSample> refined(crossings.size() * per_window);
  std::vector<char> keep(refined.size(), 0);
  detail::parallel_for(refined.size(), opts.threads, [&](std::size_t j) {
    const Crossing& x = crossings[j / per_window];
    const double s = opts.window_step * (static_cast<int>(j % per_window) - half_count);
    const double half_width = x.slope != 0.0 ? x.delta / std::abs(x.slope) : 0.0;
    const double param = x.root + s * half_width;
    // broad peaks (large hbar) can reach past the scan range
    if (!(x.delta > 0.0) || param < lo || param > hi) return;
    keep[j] = 1;
    const bool resolved = half_width > 64.0 * std::numeric_limits<double>::epsilon() * std::abs(x.root);
    ScanSample sample;
    if (resolved) {
      sample = detail::sample_level(detail::with_param(base, which, param), param, x.k, E_l, coupling);
    } else {
      const double detuning = x.slope * s * half_width;
      sample = detail::finish_sample(param, x.k, E_l + detuning, detuning, x.delta);
      sample.linearized = true;
    }
    sample.window_offset = s;
    refined[j] = sample;
  });

  curve.samples = std::move(coarse);
  // uncoupled crossings (no level at E_l) carry no peak
  for (std::size_t j = 0; j < refined.size(); ++j) {
    if (keep[j]) curve.samples.push_back(refined[j]);
  }
  std::stable_sort(curve.samples.begin(), curve.samples.end(), [](const ScanSample& a, const ScanSample& b) {
    if (a.param != b.param) return a.param < b.param;
    return a.window_offset < b.window_offset;
  });
  curve.peaks = find_peaks(curve, opts.threshold);
  return curve;
}

struct EnergyEstimate {
  double exact = 0.0;   // root of the quantization condition at the peak
  double series = 0.0;  // small-hbar expansion at the peak
};

/// Energy of the physical-well state from the first (k = 0) resonance.
inline EnergyEstimate infer_energy(const PeakRecord& first_peak, double v, double w_at_peak, double hbar) {
  if (first_peak.k != 0) {
    throw Error(ErrorCode::NotFirstPeak, "peak belongs to level " + std::to_string(first_peak.k) + ", not 0");
  }
  return {squarewell::solve_level(v, w_at_peak, hbar, 0).energy,
          squarewell::level_asymptotic(v, w_at_peak, hbar, 0)};
}

inline EnergyEstimate infer_energy(const ScanCurve& curve, const PeakRecord& first_peak) {
  const bool width = curve.parameter == ScanParameter::Width;
  const double v = width ? curve.base.right.v : first_peak.param_at_peak;
  const double w = width ? first_peak.param_at_peak : curve.base.right.w;
  return infer_energy(first_peak, v, w, curve.base.hbar);
}

struct Detection {
  ScanCurve curve;
  PeakRecord peak;
  EnergyEstimate energy;
  bool started_off_resonance = false;  // P_r^max at the start of the range below the off-resonance level
};

/// Energy detection: scan upward from `lo`, take the first peak and invert
/// it. Throws NoPeakFound when the range holds no resonance and NotFirstPeak
/// when the first peak is not the ground level of the probing well.
inline Detection detect(const DoubleWellSpec& base, ScanParameter which, double lo, double hi, std::size_t n,
                        double E_l, DeltaMethod method, const ScanOptions& opts = {}) {
  Detection out;
  out.curve = scan(base, which, lo, hi, n, E_l, method, opts);
  if (out.curve.peaks.empty()) {
    throw Error(ErrorCode::NoPeakFound, "no resonance in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  out.peak = out.curve.peaks.front();
  out.started_off_resonance = out.curve.samples.front().p_r_max < opts.off_resonance;
  out.energy = infer_energy(out.curve, out.peak);
  return out;
}

/// CSV with columns param, P_r_max, delta, detuning, k.
inline void write_curve_csv(std::ostream& out, const ScanCurve& curve) {
  out << "param,P_r_max,delta,detuning,k\n";
  char line[160];
  for (const auto& s : curve.samples) {
    std::snprintf(line, sizeof line, "%.16e,%.16e,%.16e,%.16e,%d\n", s.param, s.p_r_max, s.delta, s.detuning, s.k);
    out << line;
  }
}

}  // namespace tunnelcatch
