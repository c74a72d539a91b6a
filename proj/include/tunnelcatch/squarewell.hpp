#pragma once

// Spectrum of the isolated square probing well and the resonance tuning
// formulas for its width and depth.
//
// Level k of a well of depth v and width w is the root E in (-v, 0) of
//
//   w sqrt(v + E) / hbar = pi (k + 1/2) - arctan((v + 2E) / (2 sqrt(-E (v + E)))).
//
// Internally the root is found in q = sqrt(v + E), where the left side is
// linear and the arctan term is monotone, so (0, sqrt v) is an exact bracket
// for every k and no digits are lost near the bottom of the well.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tunnelcatch/error.hpp"
#include "tunnelcatch/numeric.hpp"

namespace tunnelcatch::squarewell {

struct SquareWellLevel {
  int k = 0;
  double energy = 0.0;
  double depth_offset = 0.0;  // v + E, kept separately for precision
  double residual = 0.0;
};

namespace detail {

// Quantization function in (q, p) = (sqrt(v + E), sqrt(-E)). Zero at a level;
// increasing in q for fixed v and for fixed E.
inline double quantization(double q, double p, double w, double hbar, int k) {
  return w * q / hbar - numeric::pi * (k + 0.5) + std::atan2(q * q - p * p, 2.0 * p * q);
}

inline void require_positive(double v, double w, double hbar) {
  if (!(v > 0.0) || !(w > 0.0) || !(hbar > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "square well needs v, w, hbar > 0");
  }
}

}  // namespace detail

/// Left minus right side of the quantization condition, evaluated in E.
inline double quantization_residual(double v, double w, double hbar, int k, double E) {
  return w * std::sqrt(v + E) / hbar - numeric::pi * (k + 0.5) +
         std::atan((v + 2.0 * E) / (2.0 * std::sqrt((-E) * (v + E))));
}

inline int level_count(double v, double w, double hbar) {
  detail::require_positive(v, w, hbar);
  const double x = w * std::sqrt(v) / (numeric::pi * hbar);
  const double fl = std::floor(x);
  // at an exact integer the top level sits at E = 0 and is not bound
  return static_cast<int>(fl) + (x == fl ? 0 : 1);
}

inline SquareWellLevel solve_level(double v, double w, double hbar, int k) {
  detail::require_positive(v, w, hbar);
  if (k < 0 || k >= level_count(v, w, hbar)) {
    throw Error(ErrorCode::EnergyOutOfRange, "level " + std::to_string(k) + " does not exist");
  }
  const double top = std::sqrt(v);
  auto fdf = [&](double q) {
    const double p = std::sqrt(std::max(v - q * q, 0.0));
    return std::pair{detail::quantization(q, p, w, hbar, k), w / hbar + 2.0 / p};
  };
  numeric::RootOptions opts;
  opts.x_tolerance = 1e-15 * top;
  const double q = numeric::find_root_newton(fdf, 0.0, top, opts);
  SquareWellLevel level;
  level.k = k;
  level.depth_offset = q * q;
  level.energy = q * q - v;
  level.residual = quantization_residual(v, w, hbar, k, level.energy);
  return level;
}

inline std::vector<SquareWellLevel> solve_levels(double v, double w, double hbar) {
  const int n = level_count(v, w, hbar);
  std::vector<SquareWellLevel> levels;
  levels.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) levels.push_back(solve_level(v, w, hbar, k));
  return levels;
}

/// Small-hbar expansion of level k through the hbar^5 term.
inline double level_asymptotic(double v, double w, double hbar, int k) {
  const double n2pi2 = (k + 1.0) * (k + 1.0) * numeric::pi * numeric::pi;
  const double sv = std::sqrt(v);
  const double series = 1.0 - 4.0 * hbar / (w * sv) + 12.0 * hbar * hbar / (w * w * v) -
                        2.0 * (48.0 + n2pi2) * hbar * hbar * hbar / (3.0 * v * sv * w * w * w);
  return -v + hbar * hbar * n2pi2 / (w * w) * series;
}

/// Width at which level k of the square well sits exactly at E_l.
inline double resonance_width(double E_l, double v, double hbar, int k) {
  if (!(E_l > -v) || !(E_l < 0.0)) {
    throw Error(ErrorCode::EnergyOutOfRange, "need -v < E_l < 0");
  }
  if (!(hbar > 0.0) || k < 0) throw Error(ErrorCode::InvalidArgument, "need hbar > 0 and k >= 0");
  const double q = std::sqrt(v + E_l);
  const double phase = std::atan((v + 2.0 * E_l) / (2.0 * std::sqrt((-E_l) * (v + E_l))));
  return numeric::pi * hbar / q * (k + 0.5 - phase / numeric::pi);
}

struct ResonanceDepth {
  double exact = 0.0;
  double asymptotic = 0.0;
};

/// Depth at which level k sits at E_l. `exact` inverts the quantization
/// condition numerically; `asymptotic` is the small-hbar series.
inline ResonanceDepth resonance_depth(double E_l, double w, double hbar, int k) {
  if (!(E_l < 0.0)) throw Error(ErrorCode::EnergyOutOfRange, "need E_l < 0");
  if (!(w > 0.0) || !(hbar > 0.0) || k < 0) {
    throw Error(ErrorCode::InvalidArgument, "need w, hbar > 0 and k >= 0");
  }
  const double p = std::sqrt(-E_l);
  auto g = [&](double q) { return detail::quantization(q, p, w, hbar, k); };
  // g(0+) = -pi (k + 1) and g grows without bound, so expand upward
  double hi = numeric::pi * hbar * (k + 1.0) / w;
  int expansions = 0;
  while (!(g(hi) > 0.0)) {
    hi *= 2.0;
    if (++expansions > 200 || !std::isfinite(hi)) {
      throw Error(ErrorCode::NoDepthRoot, "level " + std::to_string(k) + " never reaches E_l");
    }
  }
  auto fdf = [&](double q) { return std::pair{g(q), w / hbar + 2.0 * p / (q * q + p * p)}; };
  numeric::RootOptions opts;
  opts.x_tolerance = 1e-16 * hi;
  const double q = numeric::find_root_newton(fdf, 0.0, hi, opts);

  const double n2pi2 = (k + 1.0) * (k + 1.0) * numeric::pi * numeric::pi;
  const double series = 1.0 - 4.0 * hbar / (w * p) - 12.0 * hbar * hbar / (w * w * E_l) -
                        4.0 * (24.0 - n2pi2) * hbar * hbar * hbar / (3.0 * w * w * w * p * p * p);
  return {q * q + p * p, -E_l + hbar * hbar * n2pi2 / (w * w) * series};
}

}  // namespace tunnelcatch::squarewell
