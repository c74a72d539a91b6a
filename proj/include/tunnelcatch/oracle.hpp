#pragma once

// Glue that builds the grid-side picture of a scenario: one grid shared by
// the isolated left well, the isolated square well and the full double well,
// with the square-well width re-tuned on that grid so the two isolated
// discrete levels coincide (or sit at a requested detuning).
//
// Discretization moves each level by O(h^2), far more than the exponentially
// small couplings, so comparing grid splittings against a width taken from
// the analytic resonance formula would compare against a detuned system.

#include <cmath>
#include <cstddef>
#include <optional>

#include "tunnelcatch/eigensolve.hpp"
#include "tunnelcatch/error.hpp"
#include "tunnelcatch/model.hpp"
#include "tunnelcatch/numeric.hpp"
#include "tunnelcatch/semiclassic.hpp"
#include "tunnelcatch/squarewell.hpp"

namespace tunnelcatch::oracle {

struct GridOptions {
  double h = 1e-3;
  double padding = 2.0;
  std::size_t left_level = 0;   // which state of the physical well
  std::size_t right_level = 0;  // which square-well level is tuned onto it
};

/// Everything the grid knows about one tuned configuration.
struct TunedScenario {
  DoubleWellSpec spec;       // right.w is the grid-tuned width
  double analytic_width = 0;  // resonance width from the closed formula
  Grid grid;
  BarrierData barrier;
  BoundState left;   // isolated physical-well state
  BoundState right;  // isolated square-well state
  double E_l = 0.0;
  double detuning = 0.0;  // right.energy - left.energy achieved on the grid
};

/// Lowest-index state of the isolated physical well on a throwaway grid,
/// used only to size the production grid.
inline double estimate_left_energy(const DoubleWellSpec& spec, const GridOptions& opts) {
  const double lo = spec.left.support_lo - opts.padding;
  const double hi = spec.left.a() + opts.padding;
  const Grid g = make_grid(lo, hi, opts.h, 0.5 * (lo + hi));
  const TridiagonalOperator op = discretize(spec, g, WellPart::Left);
  return eigenvalue(op, opts.left_level);
}

/// Width for which the isolated discrete square-well level `k` equals
/// `target` on `grid` (bisection/secant on the width; the cell-averaged
/// well makes the level continuous in w).
inline double tune_width_on_grid(const DoubleWellSpec& spec, const Grid& grid, std::size_t k, double target,
                                 double w_guess) {
  auto level_minus_target = [&](double w) {
    DoubleWellSpec trial = spec;
    trial.right.w = w;
    const TridiagonalOperator op = discretize(trial, grid, WellPart::Right);
    return eigenvalue(op, k) - target;
  };
  double lo = 0.9 * w_guess;
  double hi = 1.1 * w_guess;
  // levels fall as the well widens
  for (int i = 0; i < 40 && level_minus_target(lo) < 0.0; ++i) lo *= 0.9;
  for (int i = 0; i < 40 && level_minus_target(hi) > 0.0; ++i) hi *= 1.1;
  numeric::RootOptions opts;
  opts.x_tolerance = 0.0;
  return numeric::find_root(level_minus_target, lo, hi, opts);
}

/// Builds the shared grid around `spec` and tunes the probing-well width so
/// the discrete isolated levels differ by `detuning`. Throws
/// ValidityViolated when the barrier center is not between the wells.
inline TunedScenario tune(const DoubleWellSpec& spec, const GridOptions& opts, double detuning = 0.0,
                          std::optional<double> width_hint = std::nullopt) {
  validate(spec);
  const double E_guess = estimate_left_energy(spec, opts);
  const int k = static_cast<int>(opts.right_level);
  const double w_guess = width_hint.value_or(squarewell::resonance_width(E_guess, spec.right.v, spec.hbar, k));

  TunedScenario out;
  out.spec = spec;
  out.spec.right.w = w_guess;
  out.barrier = barrier_center(out.spec, E_guess);
  if (!out.barrier.valid_two_level) {
    throw Error(ErrorCode::ValidityViolated, "barrier center outside (a, b) at E = " + std::to_string(E_guess));
  }
  // room for the tuned width on the right
  DoubleWellSpec sizing = out.spec;
  sizing.right.w = 1.5 * w_guess;
  out.grid = make_grid(sizing, E_guess, opts.h, opts.padding, out.barrier.c);

  const TridiagonalOperator left_op = discretize(out.spec, out.grid, WellPart::Left);
  out.E_l = eigenvalue(left_op, opts.left_level);
  out.left = eigenvector(left_op, out.E_l);

  out.spec.right.w = tune_width_on_grid(out.spec, out.grid, opts.right_level, out.E_l + detuning, w_guess);
  out.analytic_width = squarewell::resonance_width(out.E_l, spec.right.v, spec.hbar, k);
  out.barrier = barrier_center(out.spec, out.E_l);
  if (!out.barrier.valid_two_level) {
    throw Error(ErrorCode::ValidityViolated, "barrier center outside (a, b) at E_l");
  }
  out.grid.c_split = out.barrier.c;
  out.left.grid = out.grid;

  const TridiagonalOperator right_op = discretize(out.spec, out.grid, WellPart::Right);
  out.right = eigenvector(right_op, eigenvalue(right_op, opts.right_level));
  out.detuning = out.right.energy - out.E_l;
  return out;
}

inline TridiagonalOperator full_operator(const TunedScenario& s) { return discretize(s.spec, s.grid); }

struct SplitPair {
  double E1 = 0.0;
  double E2 = 0.0;
  double Delta = 0.0;
  std::size_t index = 0;  // index of E1 in the full spectrum
};

/// The two full-grid eigenvalues adjacent to E_l: E1 is the highest one
/// below E_l + detuning/2, E2 the next.
inline SplitPair split_pair(const TridiagonalOperator& full, const TunedScenario& s) {
  const double centre = s.E_l + 0.5 * s.detuning;
  const std::size_t below = full.count_below(centre);
  if (below == 0) throw Error(ErrorCode::NotEnoughBoundStates, "no eigenvalue below the resonance");
  SplitPair p;
  p.index = below - 1;
  p.E1 = eigenvalue(full, p.index);
  p.E2 = eigenvalue(full, p.index + 1);
  p.Delta = pair_gap(full, p.index, p.E1, p.E2);
  return p;
}

}  // namespace tunnelcatch::oracle
