#pragma once

// Scalar kernels shared by every module: bracketed root finding and
// adaptive quadrature with turning-point substitution.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "tunnelcatch/error.hpp"

namespace tunnelcatch::numeric {

inline constexpr double pi = std::numbers::pi;

struct RootOptions {
  double x_tolerance = 1e-12;
  int max_bisections = 400;
  int newton_iterations = 60;
};

/// Root of a continuous function with a sign change on [lo, hi].
/// Bisection until the bracket is small, then secant steps kept inside the
/// bracket (falls back to bisection whenever a step escapes).
template <class F>
double find_root(F&& f, double lo, double hi, RootOptions opts = {}) {
  if (lo > hi) std::swap(lo, hi);
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(std::signbit(flo) != std::signbit(fhi)) || !std::isfinite(flo) || !std::isfinite(fhi)) {
    throw Error(ErrorCode::RootBracketFailure,
                "no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  for (int it = 0; it < opts.max_bisections; ++it) {
    const double width = hi - lo;
    if (width <= opts.x_tolerance || width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
      break;
    }
    double x = 0.5 * (lo + hi);
    // secant candidate once the bracket is reasonably tight
    if (it > 8) {
      const double s = hi - fhi * (hi - lo) / (fhi - flo);
      if (s > lo + 0.05 * width && s < hi - 0.05 * width) x = s;
    }
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (std::signbit(fx) == std::signbit(flo)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

/// Same contract, with a derivative: `fdf(x)` returns {f(x), f'(x)}.
/// Bisection shrinks the bracket to 1e-3 of its size, then up to
/// `newton_iterations` Newton steps, each rejected in favour of bisection if
/// it leaves the bracket.
template <class FDF>
double find_root_newton(FDF&& fdf, double lo, double hi, RootOptions opts = {}) {
  if (lo > hi) std::swap(lo, hi);
  auto [flo, dlo] = fdf(lo);
  auto [fhi, dhi] = fdf(hi);
  (void)dlo;
  (void)dhi;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(std::signbit(flo) != std::signbit(fhi)) || !std::isfinite(flo) || !std::isfinite(fhi)) {
    throw Error(ErrorCode::RootBracketFailure,
                "no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const double initial = hi - lo;
  while (hi - lo > 1e-3 * initial) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fdf(mid).first;
    if (fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < opts.newton_iterations + opts.max_bisections; ++it) {
    auto [fx, dfx] = fdf(x);
    if (fx == 0.0) return x;
    if (std::signbit(fx) == std::signbit(flo)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    double next = x - fx / dfx;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= opts.x_tolerance || hi - lo <= opts.x_tolerance) {
      // the last step may have been a bisection; finish with plain Newton
      for (int polish = 0; polish < 3; ++polish) {
        auto [fp, dfp] = fdf(x);
        const double candidate = x - fp / dfp;
        if (fp == 0.0 || !std::isfinite(candidate) || candidate < lo || candidate > hi) break;
        x = candidate;
      }
      break;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return x;
}

// The depth cap matters: near a turning point V - E is formed by cancellation,
// the integrand carries relative noise far above 1e-13 there and the error
// estimate never settles, so an uncapped recursion bisects every panel.
struct QuadratureOptions {
  double relative_tolerance = 1e-13;
  unsigned max_depth = 10;
};

/// Adaptive 31-point Gauss–Kronrod on a smooth integrand.
template <class F>
double integrate(F&& f, double lo, double hi, QuadratureOptions opts = {}) {
  if (lo == hi) return 0.0;
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, opts.max_depth, opts.relative_tolerance, &error);
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::QuadratureFailure, "non-finite integral");
  }
  return value;
}

/// ∫ f(x) dx from a turning point `turn` to `other` (either side), with the
/// substitution x = turn ± t² that removes √-type endpoint behaviour.
template <class F>
double integrate_from_turning_point(F&& f, double turn, double other, QuadratureOptions opts = {}) {
  if (turn == other) return 0.0;
  const double sign = other > turn ? 1.0 : -1.0;
  const double t_max = std::sqrt(std::abs(other - turn));
  auto g = [&](double t) { return 2.0 * t * f(turn + sign * t * t); };
  return sign * integrate(g, 0.0, t_max, opts);
}

}  // namespace tunnelcatch::numeric
