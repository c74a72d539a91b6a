#pragma once

// WKB barrier quantities (bank actions, barrier center, coupling delta) and
// the two-level reduction of the double well near a common energy.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "tunnelcatch/eigensolve.hpp"
#include "tunnelcatch/error.hpp"
#include "tunnelcatch/model.hpp"
#include "tunnelcatch/numeric.hpp"

namespace tunnelcatch {

/// ∫ sqrt(V(x) - E) dx over [from, to] for any potential callable. Panels
/// are split at `breaks`; the 1e-2 end pieces of every panel use the x = end
/// ± t^2 substitution so turning points cost nothing extra.
template <class Potential>
double action_integral(const Potential& V, double E, double from, double to, std::span<const double> breaks) {
  if (from == to) return 0.0;
  if (from > to) return -action_integral(V, E, to, from, breaks);
  const double slack = 1e-10 * std::max(1.0, std::abs(E));
  auto momentum = [&](double x) {
    const double gap = V(x) - E;
    if (gap < -slack) {
      throw Error(ErrorCode::BarrierPierced, "V(x) <= E inside the barrier at x = " + std::to_string(x));
    }
    return std::sqrt(std::max(gap, 0.0));
  };
  std::vector<double> cuts{from};
  for (double b : breaks) {
    if (b > from && b < to) cuts.push_back(b);
  }
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(to);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double s0 = cuts[i];
    const double s1 = cuts[i + 1];
    if (s1 <= s0) continue;
    const double end = std::min(1e-2, (s1 - s0) / 3.0);
    total += numeric::integrate_from_turning_point(momentum, s0, s0 + end);
    total -= numeric::integrate_from_turning_point(momentum, s1, s1 - end);
    if (s1 - end > s0 + end) total += numeric::integrate(momentum, s0 + end, s1 - end);
  }
  return total;
}

/// Tunnel action ∫ sqrt(V - E) dx of the double well over [from, to].
inline double tunnel_action(const DoubleWellSpec& spec, double E, double from, double to) {
  const auto breaks = breakpoints(spec);
  auto V = [&](double x) { return eval_potential(spec, x); };
  return action_integral(V, E, from, to, breaks);
}

/// Point c in [x_l, x_r] splitting the barrier action into equal halves.
template <class Potential>
double equal_action_point(const Potential& V, double E, double x_l, double x_r, std::span<const double> breaks) {
  const double full = action_integral(V, E, x_l, x_r, breaks);
  auto fdf = [&](double c) {
    const double left = action_integral(V, E, x_l, c, breaks);
    return std::pair{2.0 * left - full, 2.0 * std::sqrt(std::max(V(c) - E, 0.0))};
  };
  numeric::RootOptions opts;
  opts.x_tolerance = 1e-13;
  return numeric::find_root_newton(fdf, x_l, x_r, opts);
}

struct BarrierData {
  double x_l = 0.0;
  double x_r = 0.0;
  double S_l = 0.0;
  double S_r = 0.0;  // zero for the vertical square wall
  double c = 0.0;
  double full_action = 0.0;
  bool valid_two_level = false;
};

/// Closed form of the barrier center when the right bank is a vertical wall.
inline double barrier_center_closed_form(double S_l, double a, double b, double E) {
  return 0.5 * (a + b) - S_l / (2.0 * std::sqrt(-E));
}

inline BarrierData barrier_center(const DoubleWellSpec& spec, double E) {
  const TurningPoints tp = turning_points(spec, E);
  const auto breaks = breakpoints(spec);
  auto V = [&](double x) { return eval_potential(spec, x); };
  BarrierData data;
  data.x_l = tp.x_l;
  data.x_r = tp.x_r;
  data.S_l = action_integral(V, E, tp.x_l, spec.a(), breaks);
  data.S_r = action_integral(V, E, spec.right.b, tp.x_r, breaks);
  data.full_action = data.S_l + (spec.right.b - spec.a()) * std::sqrt(-E) + data.S_r;
  data.c = equal_action_point(V, E, tp.x_l, tp.x_r, breaks);
  data.valid_two_level = spec.a() < data.c && data.c < spec.right.b;
  return data;
}

/// WKB coupling between the left-well state at E and the square-well level
/// at the same energy, using a precomputed barrier.
inline double wkb_delta(const DoubleWellSpec& spec, const BarrierData& barrier, double E, double omega_l) {
  if (!barrier.valid_two_level) {
    throw Error(ErrorCode::InvalidTwoLevel, "barrier center outside (a, b): wells too close");
  }
  const double v = spec.right.v;
  const double w = spec.right.w;
  if (!(E > -v) || !(E < 0.0)) throw Error(ErrorCode::EnergyOutOfRange, "need -v < E < 0");
  const double hbar = spec.hbar;
  const double prefactor =
      2.0 * hbar * std::pow(-E, 0.25) * std::sqrt(2.0 * (v + E) * omega_l / (numeric::pi * v * w));
  return prefactor * std::exp(-barrier.full_action / hbar);
}

inline double wkb_delta(const DoubleWellSpec& spec, double E, double omega_l) {
  return wkb_delta(spec, barrier_center(spec, E), E, omega_l);
}

/// Coupling from the Wronskian of the two isolated states at the node
/// nearest to c, 2 hbar^2 [psi_l psi_r' - psi_r psi_l'], centered differences.
/// Returned as a magnitude.
inline double wronskian_delta(const BoundState& psi_l, const BoundState& psi_r, double c, double hbar) {
  if (psi_l.grid != psi_r.grid || psi_l.psi.size() != psi_r.psi.size()) {
    throw Error(ErrorCode::GridMismatch, "Wronskian needs both states on one grid");
  }
  const Grid& g = psi_l.grid;
  const std::size_t i = g.nearest(c);
  if (i == 0 || i + 1 >= g.n) throw Error(ErrorCode::InvalidArgument, "c must be an interior node");
  const auto& l = psi_l.psi;
  const auto& r = psi_r.psi;
  const long double dr = (static_cast<long double>(r[i + 1]) - r[i - 1]) / (2.0L * g.h);
  const long double dl = (static_cast<long double>(l[i + 1]) - l[i - 1]) / (2.0L * g.h);
  const long double W = l[i] * dr - r[i] * dl;
  return static_cast<double>(std::abs(2.0L * hbar * hbar * W));
}

struct TwoLevelResult {
  double E1 = 0.0;
  double E2 = 0.0;
  double delta = 0.0;
  double Delta = 0.0;
  double alpha = 0.0;
  double E_l = 0.0;
  double E_r = 0.0;

  double detuning() const { return E_r - E_l; }
};

/// tan(alpha) = r + sqrt(1 + r^2), r = detuning / delta, in a form that does
/// not cancel for large negative r.
inline double mixing_angle(double detuning, double delta) {
  const double r = detuning / delta;
  const double root = std::hypot(1.0, r);
  const double tangent = r >= 0.0 ? r + root : 1.0 / (root - r);
  return std::atan(tangent);
}

inline TwoLevelResult two_level_spectrum(double E_l, double E_r, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::NonPositiveDelta, "delta must be positive");
  TwoLevelResult out;
  out.E_l = E_l;
  out.E_r = E_r;
  out.delta = delta;
  out.Delta = std::hypot(delta, E_r - E_l);
  const double mean = 0.5 * (E_r + E_l);
  out.E1 = mean - 0.5 * out.Delta;
  out.E2 = mean + 0.5 * out.Delta;
  out.alpha = mixing_angle(E_r - E_l, delta);
  return out;
}

/// psi_1 = psi_l cos(alpha) + psi_r sin(alpha), psi_2 = psi_l sin(alpha) -
/// psi_r cos(alpha), renormalized. Energies are left as NaN: the two-level
/// energies live in TwoLevelResult.
inline std::pair<BoundState, BoundState> bilocalized_states(const BoundState& psi_l, const BoundState& psi_r,
                                                            double alpha) {
  if (psi_l.grid != psi_r.grid || psi_l.psi.size() != psi_r.psi.size()) {
    throw Error(ErrorCode::GridMismatch, "states live on different grids");
  }
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  auto combine = [&](double wl, double wr) {
    BoundState s;
    s.energy = std::numeric_limits<double>::quiet_NaN();
    s.grid = psi_l.grid;
    s.psi.resize(psi_l.psi.size());
    long double norm2 = 0.0L;
    for (std::size_t i = 0; i < s.psi.size(); ++i) {
      s.psi[i] = wl * psi_l.psi[i] + wr * psi_r.psi[i];
      norm2 += static_cast<long double>(s.psi[i]) * s.psi[i];
    }
    const double scale = static_cast<double>(1.0L / std::sqrt(norm2 * s.grid.h));
    for (double& e : s.psi) e *= scale;
    int nodes = 0;
    double peak = 0.0;
    for (double e : s.psi) peak = std::max(peak, std::abs(e));
    int last = 0;
    for (double e : s.psi) {
      if (std::abs(e) <= 1e-12 * peak) continue;
      const int sign = e > 0.0 ? 1 : -1;
      if (last != 0 && sign != last) ++nodes;
      last = sign;
    }
    s.node_count = nodes;
    return s;
  };
  return {combine(ca, sa), combine(sa, -ca)};
}

}  // namespace tunnelcatch
