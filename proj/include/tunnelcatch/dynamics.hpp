#pragma once

// Tunnelling dynamics of a state prepared in the physical well: the
// closed-form two-level solution and a Crank–Nicolson grid propagator used
// as an independent check of it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tunnelcatch/eigensolve.hpp"
#include "tunnelcatch/error.hpp"
#include "tunnelcatch/numeric.hpp"
#include "tunnelcatch/semiclassic.hpp"

namespace tunnelcatch {

struct OccupationTrace {
  std::vector<double> times;
  std::vector<double> P_l;
  std::vector<double> P_r;
  std::vector<double> norm;
  double period = 0.0;
  double transfer_time = 0.0;
  double max_P_r = 0.0;
};

/// Amplitudes on psi_l and psi_r at time t for the initial state psi_l.
/// The common phase exp(-i (E1 + E2) t / 2 hbar) is factored out and the beat
/// uses the stored splitting rather than E2 - E1, which would lose most of
/// its digits when Delta is tiny next to |E|.
inline std::pair<std::complex<double>, std::complex<double>> two_level_evolve(const TwoLevelResult& result,
                                                                              double alpha, double t,
                                                                              double hbar) {
  const double mean = 0.5 * (result.E1 + result.E2);
  const double half_beat = 0.5 * result.Delta * t / hbar;
  const std::complex<double> common = std::polar(1.0, -mean * t / hbar);
  const std::complex<double> e1 = std::polar(1.0, half_beat);   // exp(-i (E1 - mean) t / hbar)
  const std::complex<double> e2 = std::polar(1.0, -half_beat);  // exp(-i (E2 - mean) t / hbar)
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  return {common * (e1 * c * c + e2 * s * s), common * (c * s * (e2 - e1))};
}

inline OccupationTrace occupation_probabilities(const TwoLevelResult& result, double alpha,
                                                std::span<const double> times, double hbar) {
  const double c2 = std::cos(alpha) * std::cos(alpha);
  const double s2 = std::sin(alpha) * std::sin(alpha);
  const double Delta = result.Delta;
  OccupationTrace trace;
  trace.times.assign(times.begin(), times.end());
  for (double t : times) {
    const double beat = std::cos(Delta * t / hbar);
    const double pr = 2.0 * c2 * s2 * (1.0 - beat);
    const double pl = c2 * c2 + s2 * s2 + 2.0 * c2 * s2 * beat;
    trace.P_l.push_back(pl);
    trace.P_r.push_back(pr);
    trace.norm.push_back(pl + pr);
    trace.max_P_r = std::max(trace.max_P_r, pr);
  }
  trace.period = 2.0 * numeric::pi * hbar / Delta;
  trace.transfer_time = numeric::pi * hbar / Delta;
  return trace;
}

/// Maximal probability in the probing well for coupling delta and detuning.
inline double p_r_max(double delta, double detuning) {
  if (!(delta > 0.0)) throw Error(ErrorCode::NonPositiveDelta, "delta must be positive");
  return delta * delta / (delta * delta + detuning * detuning);
}

namespace detail {

// Parabola vertex through three samples; returns {t, value}.
inline std::pair<double, double> parabolic_peak(double t0, double f0, double t1, double f1, double t2, double f2) {
  const double d01 = (f1 - f0) / (t1 - t0);
  const double d12 = (f2 - f1) / (t2 - t1);
  const double curvature = (d12 - d01) / (t2 - t0);
  if (!(curvature < 0.0)) return {t1, f1};
  const double slope = d01 + curvature * (t1 - t0);  // derivative at t1 of the interpolant
  double tv = t1 - slope / (2.0 * curvature);
  tv = std::clamp(tv, t0, t2);
  const double fv = f1 + slope * (tv - t1) + curvature * (tv - t1) * (tv - t1);
  return {tv, fv};
}

// Refined local maxima of a sampled curve: a peak is accepted once the curve
// falls below half of the global maximum again (hysteresis), so ripples
// on top of a broad maximum are not counted twice.
inline std::vector<std::pair<double, double>> sampled_peaks(std::span<const double> t, std::span<const double> f) {
  std::vector<std::pair<double, double>> peaks;
  if (f.size() < 3) return peaks;
  double top = 0.0;
  for (double v : f) top = std::max(top, v);
  if (!(top > 0.0)) return peaks;
  const double half = 0.5 * top;
  std::size_t i = 0;
  while (i < f.size()) {
    while (i < f.size() && f[i] < half) ++i;
    if (i >= f.size()) break;
    std::size_t best = i;
    while (i < f.size() && f[i] >= half) {
      if (f[i] > f[best]) best = i;
      ++i;
    }
    if (best == 0 || best + 1 >= f.size()) {
      peaks.emplace_back(t[best], f[best]);
    } else {
      peaks.push_back(parabolic_peak(t[best - 1], f[best - 1], t[best], f[best], t[best + 1], f[best + 1]));
    }
  }
  return peaks;
}

}  // namespace detail

struct PropagationOptions {
  double norm_budget = 1e-9;
};

/// Crank–Nicolson propagation of psi0 under H for `steps` equal steps up to
/// t_final, recording P_l = sum_{x < c} |psi|^2 h and P_r = sum_{x >= c}.
///
/// The run happens in the frame rotating at psi0.energy (a global phase), so
/// the time step only has to resolve the slow tunnelling beat. Each step is
/// psi <- 2 (I + i tau K)^{-1} psi - psi with K = (H - E0)/2, tau = dt/hbar,
/// which is the Cayley form without ever forming (I - i tau K) psi. The
/// factorization uses the same differential variables as the eigensolver.
inline OccupationTrace grid_propagate(const TridiagonalOperator& H, const BoundState& psi0, double t_final,
                                      std::size_t steps, double c_split, PropagationOptions opts = {}) {
  using cld = std::complex<long double>;
  if (psi0.grid != H.grid() || psi0.psi.size() != H.size()) {
    throw Error(ErrorCode::GridMismatch, "initial state and operator use different grids");
  }
  if (steps == 0 || !(t_final > 0.0)) throw Error(ErrorCode::InvalidArgument, "need steps > 0 and t_final > 0");

  const std::size_t n = H.size();
  const Grid& grid = H.grid();
  const long double t = H.hopping();
  const long double dt = static_cast<long double>(t_final) / static_cast<long double>(steps);
  const long double tau = dt / H.hbar();
  const cld s(0.0L, 0.5L * tau * t);
  const cld inv_s = 1.0L / s;
  const long double E0 = psi0.energy;
  const auto V = H.potential();

  std::vector<cld> inv_pivot(n);
  {
    cld carry(1.0L, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      const cld y = inv_s + (static_cast<long double>(V[i]) - E0) / t + carry;
      inv_pivot[i] = 1.0L / (1.0L + y);
      carry = y * inv_pivot[i];
    }
  }

  std::size_t split = 0;
  while (split < n && grid.x(split) < c_split) ++split;

  std::vector<cld> psi(psi0.psi.begin(), psi0.psi.end());
  std::vector<cld> z(n);
  const long double h = grid.h;

  OccupationTrace trace;
  trace.times.reserve(steps + 1);
  auto record = [&](std::size_t step) {
    long double left = 0.0L;
    long double right = 0.0L;
    for (std::size_t i = 0; i < split; ++i) left += std::norm(psi[i]);
    for (std::size_t i = split; i < n; ++i) right += std::norm(psi[i]);
    left *= h;
    right *= h;
    trace.times.push_back(static_cast<double>(dt * static_cast<long double>(step)));
    trace.P_l.push_back(static_cast<double>(left));
    trace.P_r.push_back(static_cast<double>(right));
    trace.norm.push_back(static_cast<double>(left + right));
  };
  record(0);
  const double initial_norm = trace.norm.front();

  for (std::size_t step = 1; step <= steps; ++step) {
    z[0] = psi[0] * inv_s;
    for (std::size_t i = 1; i < n; ++i) z[i] = psi[i] * inv_s + z[i - 1] * inv_pivot[i - 1];
    cld next = z[n - 1] * inv_pivot[n - 1];
    psi[n - 1] = 2.0L * next - psi[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
      next = (z[i] + next) * inv_pivot[i];
      psi[i] = 2.0L * next - psi[i];
    }
    record(step);
    if (std::abs(trace.norm.back() - initial_norm) > opts.norm_budget) {
      throw Error(ErrorCode::StabilityBudgetExceeded,
                  "norm drifted by " + std::to_string(trace.norm.back() - initial_norm) + " at step " +
                      std::to_string(step));
    }
  }

  const auto peaks = detail::sampled_peaks(trace.times, trace.P_r);
  for (double p : trace.P_r) trace.max_P_r = std::max(trace.max_P_r, p);
  if (!peaks.empty()) {
    trace.transfer_time = peaks.front().first;
    trace.max_P_r = std::max(trace.max_P_r, peaks.front().second);
    trace.period = peaks.size() > 1 ? peaks[1].first - peaks[0].first : 2.0 * peaks.front().first;
  }
  return trace;
}

/// CSV with columns t, P_l, P_r, norm in 17-significant-digit scientific
/// notation.
inline void write_trace_csv(std::ostream& out, const OccupationTrace& trace) {
  out << "t,P_l,P_r,norm\n";
  char line[160];
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::snprintf(line, sizeof line, "%.16e,%.16e,%.16e,%.16e\n", trace.times[i], trace.P_l[i], trace.P_r[i],
                  trace.norm[i]);
    out << line;
  }
}

}  // namespace tunnelcatch
