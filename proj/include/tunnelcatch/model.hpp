#pragma once

// Double-well geometry: a smooth, compactly supported physical well on the
// left plus a square probing well on the right.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelcatch/error.hpp"
#include "tunnelcatch/numeric.hpp"

namespace tunnelcatch {

enum class WellFamily { HarmonicCap, SmoothBump };

constexpr std::string_view to_string(WellFamily f) {
  return f == WellFamily::HarmonicCap ? "HarmonicCap" : "SmoothBump";
}

/// Left (physical) well V_l. Non-positive, minimum -depth at `center`,
/// identically zero outside [support_lo, support_hi].
///
/// HarmonicCap: V_l = min(-d + (omega^2/4)(x - x0)^2, 0). The support is
/// where the parabola is below zero, so it is derived from (d, omega).
/// SmoothBump:  V_l = -d exp(1 - 1/(1 - s^2)), s = 2(x - x0)/L, C-infinity.
struct PhysicalWellSpec {
  WellFamily family = WellFamily::HarmonicCap;
  double depth = 1.0;
  double support_lo = -1.0;
  double support_hi = 1.0;
  double center = 0.0;
  double omega = 0.0;  // HarmonicCap only

  static PhysicalWellSpec harmonic_cap(double depth, double omega, double center = 0.0) {
    if (!(depth > 0.0) || !(omega > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "HarmonicCap needs depth > 0 and omega > 0");
    }
    const double half = 2.0 * std::sqrt(depth) / omega;
    return {WellFamily::HarmonicCap, depth, center - half, center + half, center, omega};
  }

  static PhysicalWellSpec smooth_bump(double depth, double lo, double hi) {
    if (!(depth > 0.0) || !(hi > lo)) {
      throw Error(ErrorCode::InvalidArgument, "SmoothBump needs depth > 0 and a non-empty support");
    }
    return {WellFamily::SmoothBump, depth, lo, hi, 0.5 * (lo + hi), 0.0};
  }

  /// Right edge of the support (the `a` of the geometry).
  double a() const { return support_hi; }
  double length() const { return support_hi - support_lo; }
  double minimum() const { return -depth; }

  double operator()(double x) const {
    if (x <= support_lo || x >= support_hi) return 0.0;
    if (family == WellFamily::HarmonicCap) {
      const double u = x - center;
      return std::min(-depth + 0.25 * omega * omega * u * u, 0.0);
    }
    const double s = 2.0 * (x - center) / length();
    const double r = 1.0 - s * s;
    if (r <= 0.0) return 0.0;
    return -depth * std::exp(1.0 - 1.0 / r);
  }

  double derivative(double x) const {
    if (x <= support_lo || x >= support_hi) return 0.0;
    if (family == WellFamily::HarmonicCap) {
      return 0.5 * omega * omega * (x - center);
    }
    const double s = 2.0 * (x - center) / length();
    const double r = 1.0 - s * s;
    if (r <= 0.0) return 0.0;
    return (*this)(x) * (-2.0 * s / (r * r)) * (2.0 / length());
  }
};

/// Right (probing) well: -v on the open interval (b, b + w).
struct SquareWellSpec {
  double b = 3.0;
  double w = 1.0;
  double v = 1.0;

  double right_edge() const { return b + w; }
  double operator()(double x) const { return (x > b && x < b + w) ? -v : 0.0; }
};

struct DoubleWellSpec {
  PhysicalWellSpec left;
  SquareWellSpec right;
  double hbar = 0.1;

  double a() const { return left.a(); }
};

inline void validate(const DoubleWellSpec& spec) {
  if (!(spec.hbar > 0.0)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
  if (!(spec.left.depth > 0.0)) throw Error(ErrorCode::InvalidArgument, "left depth must be positive");
  if (!(spec.right.w > 0.0) || !(spec.right.v > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "square well needs w > 0 and v > 0");
  }
  if (!(spec.a() < spec.right.b)) {
    throw Error(ErrorCode::InvalidArgument, "well supports intersect (need a < b)");
  }
}

inline double eval_potential(const DoubleWellSpec& spec, double x) {
  return spec.left(x) + spec.right(x);
}

/// Points where V is not smooth; quadrature panels are split there.
inline std::vector<double> breakpoints(const DoubleWellSpec& spec) {
  return {spec.left.support_lo, spec.left.a(), spec.right.b, spec.right.right_edge()};
}

struct TurningPoints {
  double x_l = 0.0;
  double x_r = 0.0;
  double energy = 0.0;
};

namespace detail {

inline void require_inside_left_well(const PhysicalWellSpec& left, double E) {
  if (!(E < 0.0)) throw Error(ErrorCode::NoTurningPoint, "energy must be negative");
  if (!(E > left.minimum())) {
    throw Error(ErrorCode::NoTurningPoint, "energy below the physical-well minimum");
  }
}

// Root of V_l(x) = E on the monotone slope between the center and `edge`.
inline double slope_root(const PhysicalWellSpec& left, double E, double edge) {
  auto fdf = [&](double x) { return std::pair{left(x) - E, left.derivative(x)}; };
  try {
    const double x = numeric::find_root_newton(fdf, left.center, edge);
    return x;
  } catch (const Error&) {
    throw Error(ErrorCode::NonMonotoneSlope, "could not bracket the turning point");
  }
}

}  // namespace detail

/// Classically allowed interval [x_outer, x_inner] of the isolated left well.
inline std::pair<double, double> left_well_allowed_interval(const PhysicalWellSpec& left, double E) {
  detail::require_inside_left_well(left, E);
  return {detail::slope_root(left, E, left.support_lo), detail::slope_root(left, E, left.a())};
}

inline TurningPoints turning_points(const DoubleWellSpec& spec, double E) {
  detail::require_inside_left_well(spec.left, E);
  if (!(E > -spec.right.v)) {
    throw Error(ErrorCode::NoTurningPoint, "energy below the probing-well bottom");
  }
  return {detail::slope_root(spec.left, E, spec.a()), spec.right.b, E};
}

/// ∫ sqrt(1 - V_l(x)/E) dx over [from, a]. `from` is normally x_l.
inline double separation_integral(const PhysicalWellSpec& left, double E, double from) {
  const double a = left.a();
  if (from >= a) return 0.0;
  auto f = [&](double x) { return std::sqrt(std::max(1.0 - left(x) / E, 0.0)); };
  const double near = std::min(from + 1e-2, a);
  double total = numeric::integrate_from_turning_point(f, from, near);
  if (near < a) total += numeric::integrate(f, near, a);
  return total;
}

struct SeparationCheck {
  bool valid = false;
  double margin = 0.0;    // (b - a) - integral
  double integral = 0.0;  // ∫ sqrt(1 - V_l/E) over [x_l, a]
};

/// The probing well is far enough from the physical well at energy E when
/// b - a exceeds ∫_{x_l}^{a} sqrt(1 - V_l/E) dx.
inline SeparationCheck check_separation(const DoubleWellSpec& spec, double E) {
  const TurningPoints tp = turning_points(spec, E);
  const double I = separation_integral(spec.left, E, tp.x_l);
  const double margin = (spec.right.b - spec.a()) - I;
  return {margin > 0.0, margin, I};
}

}  // namespace tunnelcatch
