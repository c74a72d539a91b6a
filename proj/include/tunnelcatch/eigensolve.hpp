#pragma once

// Brute-force grid oracle for H = -hbar^2 d^2/dx^2 + V on a uniform grid
// with Dirichlet walls: second-order central differences give a symmetric
// tridiagonal operator, eigenvalues come from Sturm-sequence bisection and
// eigenvectors from inverse iteration.
//
// Both the Sturm count and the LDL^T solves are carried out in the
// "differential" variables y_i = pivot_i / t - 1 (t = hbar^2/h^2), in long
// double. The textbook recurrence subtracts numbers of size 2t and so loses
// about eps * 4t in absolute energy, which is the same order as the
// tunnelling splittings we want to resolve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tunnelcatch/error.hpp"
#include "tunnelcatch/model.hpp"
#include "tunnelcatch/numeric.hpp"

namespace tunnelcatch {

struct Grid {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n = 2;
  double h = 1.0;
  double c_split = 0.5;

  double x(std::size_t i) const { return x_min + static_cast<double>(i) * h; }

  /// Index of the node nearest to `pos`, clamped to the grid.
  std::size_t nearest(double pos) const {
    const double r = std::round((pos - x_min) / h);
    if (r <= 0.0) return 0;
    if (r >= static_cast<double>(n - 1)) return n - 1;
    return static_cast<std::size_t>(r);
  }

  bool operator==(const Grid&) const = default;
};

/// Uniform grid from x_min to x_max with step close to `h_target`.
inline Grid make_grid(double x_min, double x_max, double h_target, double c_split) {
  if (!(x_max > x_min) || !(h_target > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid needs x_max > x_min and h > 0");
  }
  const auto cells = static_cast<std::size_t>(std::ceil((x_max - x_min) / h_target - 1e-9));
  Grid g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n = std::max<std::size_t>(cells, 1) + 1;
  g.h = (x_max - x_min) / static_cast<double>(g.n - 1);
  g.c_split = c_split;
  return g;
}

/// Grid covering the double well with `padding` beyond both supports.
/// The padding is raised to at least 3/kappa, kappa = sqrt(-E)/hbar.
inline Grid make_grid(const DoubleWellSpec& spec, double E_target, double h_target, double padding,
                      double c_split) {
  const double kappa = std::sqrt(-E_target) / spec.hbar;
  const double pad = std::max(padding, 3.0 / kappa);
  if (!(c_split > spec.a() && c_split < spec.right.b)) {
    throw Error(ErrorCode::InvalidArgument, "split point must lie strictly between the wells");
  }
  return make_grid(spec.left.support_lo - pad, spec.right.right_edge() + pad, h_target, c_split);
}

enum class WellPart { Left, Right, Both };

/// Potential sampled on the grid. The smooth well is evaluated pointwise;
/// the square well is averaged over each cell [x - h/2, x + h/2], which keeps
/// discrete levels continuous in b, w and v.
inline std::vector<double> sample_potential(const DoubleWellSpec& spec, const Grid& grid,
                                            WellPart part = WellPart::Both) {
  std::vector<double> V(grid.n, 0.0);
  const double lo_edge = spec.right.b;
  const double hi_edge = spec.right.right_edge();
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    if (part != WellPart::Right) V[i] += spec.left(x);
    if (part != WellPart::Left) {
      const double overlap = std::min(x + 0.5 * grid.h, hi_edge) - std::max(x - 0.5 * grid.h, lo_edge);
      if (overlap > 0.0) V[i] -= spec.right.v * overlap / grid.h;
    }
  }
  return V;
}

class TridiagonalOperator {
 public:
  TridiagonalOperator(Grid grid, double hbar, std::vector<double> potential)
      : grid_(grid), hbar_(hbar), t_(hbar * hbar / (grid.h * grid.h)), potential_(std::move(potential)) {
    if (potential_.size() != grid_.n) {
      throw Error(ErrorCode::GridMismatch, "potential size does not match the grid");
    }
  }

  const Grid& grid() const { return grid_; }
  double hbar() const { return hbar_; }
  /// Hopping scale hbar^2 / h^2; the off-diagonal is -t.
  double hopping() const { return t_; }
  std::span<const double> potential() const { return potential_; }
  std::size_t size() const { return potential_.size(); }

  double diagonal(std::size_t i) const { return 2.0 * t_ + potential_[i]; }
  double off_diagonal() const { return -t_; }

  std::vector<double> apply(std::span<const double> psi) const {
    const std::size_t n = size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double lap = -2.0 * psi[i];
      if (i > 0) lap += psi[i - 1];
      if (i + 1 < n) lap += psi[i + 1];
      out[i] = potential_[i] * psi[i] - t_ * lap;
    }
    return out;
  }

  /// Number of eigenvalues strictly below `sigma` (Sturm count).
  std::size_t count_below(long double sigma) const {
    const long double t = t_;
    const long double s = sigma;
    std::size_t negatives = 0;
    long double carry = 1.0L;  // y_{i-1} / (1 + y_{i-1}); 1 before the first row
    for (std::size_t i = 0; i < potential_.size(); ++i) {
      const long double y = (static_cast<long double>(potential_[i]) - s) / t + carry;
      long double pivot = 1.0L + y;
      if (pivot == 0.0L) pivot = -std::numeric_limits<long double>::epsilon() * (1.0L + std::abs(y));
      if (pivot < 0.0L) ++negatives;
      carry = y / pivot;
    }
    return negatives;
  }

  /// Gershgorin interval containing the whole spectrum.
  std::pair<double, double> spectrum_bounds() const {
    const auto [lo, hi] = std::minmax_element(potential_.begin(), potential_.end());
    return {*lo, *hi + 4.0 * t_};
  }

 private:
  Grid grid_;
  double hbar_;
  double t_;
  std::vector<double> potential_;
};

inline TridiagonalOperator discretize(const std::function<double(double)>& potential, const Grid& grid,
                                      double hbar) {
  std::vector<double> V(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) V[i] = potential(grid.x(i));
  return {grid, hbar, std::move(V)};
}

inline TridiagonalOperator discretize(const DoubleWellSpec& spec, const Grid& grid,
                                      WellPart part = WellPart::Both) {
  return {grid, spec.hbar, sample_potential(spec, grid, part)};
}

struct BoundState {
  double energy = 0.0;
  std::vector<double> psi;  // sum psi_i^2 h = 1
  int node_count = 0;
  Grid grid;
};

/// Eigenvalue number `index` (0 = lowest) by bisection on the Sturm count.
inline double eigenvalue(const TridiagonalOperator& op, std::size_t index, double lo, double hi) {
  if (op.count_below(lo) > index || op.count_below(hi) <= index) {
    throw Error(ErrorCode::RootBracketFailure, "eigenvalue " + std::to_string(index) + " not in interval");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (op.count_below(mid) > index) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Same bisection carried to long double resolution. Differences of nearly
/// degenerate pairs taken from these keep about three more digits.
inline long double eigenvalue_extended(const TridiagonalOperator& op, std::size_t index, long double lo,
                                       long double hi) {
  if (op.count_below(lo) > index || op.count_below(hi) <= index) {
    throw Error(ErrorCode::RootBracketFailure, "eigenvalue " + std::to_string(index) + " not in interval");
  }
  for (int it = 0; it < 400; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (op.count_below(mid) > index) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5L * (lo + hi);
}

/// E_{index+1} - E_index of a close pair, from extended-precision bisection.
inline double pair_gap(const TridiagonalOperator& op, std::size_t index, double E1, double E2) {
  const double pad = 1e-9 * (1.0 + std::abs(E1));
  const long double lower = eigenvalue_extended(op, index, E1 - pad, E2 + pad);
  const long double upper = eigenvalue_extended(op, index + 1, E1 - pad, E2 + pad);
  return static_cast<double>(upper - lower);
}

inline double eigenvalue(const TridiagonalOperator& op, std::size_t index) {
  const auto [lo, hi] = op.spectrum_bounds();
  return eigenvalue(op, index, lo - 1.0, hi + 1.0);
}

/// Eigenvalues inside [lo, hi), ascending.
inline std::vector<double> eigenvalues_in(const TridiagonalOperator& op, double lo, double hi) {
  const std::size_t first = op.count_below(lo);
  const std::size_t last = op.count_below(hi);
  std::vector<double> out;
  for (std::size_t j = first; j < last; ++j) out.push_back(eigenvalue(op, j, lo, hi));
  return out;
}

namespace detail {

// One solve (H - sigma) x = rhs via LDL^T in the differential variables.
// The result is scaled by t, which is irrelevant after normalization.
inline std::vector<long double> shifted_solve(const TridiagonalOperator& op, double sigma,
                                              std::span<const long double> rhs) {
  const std::size_t n = op.size();
  const long double t = op.hopping();
  const long double s = sigma;
  const auto V = op.potential();
  std::vector<long double> inv_pivot(n);
  std::vector<long double> z(n);
  long double carry = 1.0L;
  long double prev_inv = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double y = (static_cast<long double>(V[i]) - s) / t + carry;
    long double pivot = 1.0L + y;
    if (std::abs(pivot) < 1e-30L) pivot = 1e-30L;
    inv_pivot[i] = 1.0L / pivot;
    carry = y * inv_pivot[i];
    z[i] = rhs[i] + (i > 0 ? z[i - 1] * prev_inv : 0.0L);
    prev_inv = inv_pivot[i];
  }
  std::vector<long double> x(n);
  x[n - 1] = z[n - 1] * inv_pivot[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (z[i] + x[i + 1]) * inv_pivot[i];
  return x;
}

inline void normalize(std::vector<long double>& v, long double h) {
  long double norm2 = 0.0L;
  for (long double e : v) norm2 += e * e;
  const long double scale = 1.0L / std::sqrt(norm2 * h);
  for (long double& e : v) e *= scale;
}

inline void orthogonalize(std::vector<long double>& v, const std::vector<double>& against, long double h) {
  long double dot = 0.0L;
  for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * against[i];
  dot *= h;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * against[i];
}

}  // namespace detail

/// Sign so the state is positive at its first significant extremum from the
/// left; nodes counted as sign changes between significant entries.
inline void fix_sign_and_count_nodes(BoundState& state) {
  auto& psi = state.psi;
  double peak = 0.0;
  for (double e : psi) peak = std::max(peak, std::abs(e));
  const double threshold = 1e-3 * peak;
  for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
    const double m = std::abs(psi[i]);
    if (m >= threshold && m >= std::abs(psi[i - 1]) && m >= std::abs(psi[i + 1])) {
      if (psi[i] < 0.0) {
        for (double& e : psi) e = -e;
      }
      break;
    }
  }
  const double floor = 1e-12 * peak;
  int nodes = 0;
  int last_sign = 0;
  for (double e : psi) {
    if (std::abs(e) <= floor) continue;
    const int s = e > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++nodes;
    last_sign = s;
  }
  state.node_count = nodes;
}

/// Eigenvector for an eigenvalue already known to high accuracy. Vectors in
/// `cluster` (nearly degenerate partners) are projected out, twice.
inline BoundState eigenvector(const TridiagonalOperator& op, double energy,
                              std::span<const BoundState* const> cluster = {}) {
  const std::size_t n = op.size();
  const long double h = op.grid().h;
  std::vector<long double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    // smooth, sign-definite start vector with no special symmetry
    v[i] = 1.0L + 0.25L * std::sin(0.7L * static_cast<long double>(i) * 1e-3L + 0.3L);
  }
  detail::normalize(v, h);
  for (int it = 0; it < 4; ++it) {
    v = detail::shifted_solve(op, energy, v);
    for (int pass = 0; pass < 2; ++pass) {
      for (const BoundState* other : cluster) detail::orthogonalize(v, other->psi, h);
    }
    detail::normalize(v, h);
  }
  BoundState state;
  state.energy = energy;
  state.grid = op.grid();
  state.psi.assign(v.begin(), v.end());
  fix_sign_and_count_nodes(state);
  return state;
}

/// Lowest `count` eigenpairs with negative energy, ascending.
inline std::vector<BoundState> solve_bound_states(const TridiagonalOperator& op, std::size_t count) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
  const std::size_t available = op.count_below(0.0);
  if (available < count) {
    throw Error(ErrorCode::NotEnoughBoundStates, "requested " + std::to_string(count) + " bound states, only " +
                                                     std::to_string(available) + " below zero");
  }
  const double lo = op.spectrum_bounds().first - 1.0;
  std::vector<double> energies(count);
  for (std::size_t j = 0; j < count; ++j) energies[j] = eigenvalue(op, j, lo, 0.0);

  std::vector<BoundState> states;
  states.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<const BoundState*> cluster;
    for (const BoundState& s : states) {
      if (std::abs(s.energy - energies[j]) < 1e-4 * (1.0 + std::abs(energies[j]))) cluster.push_back(&s);
    }
    states.push_back(eigenvector(op, energies[j], cluster));
  }
  return states;
}

/// Eigenpair number `index` (0 = lowest), any sign of energy.
inline BoundState bound_state(const TridiagonalOperator& op, std::size_t index) {
  return eigenvector(op, eigenvalue(op, index));
}

inline double inner_product(const BoundState& a, const BoundState& b) {
  if (a.grid != b.grid) throw Error(ErrorCode::GridMismatch, "states live on different grids");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.psi.size(); ++i) acc += static_cast<long double>(a.psi[i]) * b.psi[i];
  return static_cast<double>(acc * a.grid.h);
}

/// Second-order Richardson extrapolation from steps h and h/2.
inline double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

/// Frequency 2 pi / T of the classical orbit in the left well at energy E,
/// with T = ∫ dx / sqrt(E - V_l) over the allowed interval (H = p^2 + V, so
/// dx/dt = 2p).
inline double classical_frequency(const PhysicalWellSpec& left, double E) {
  const auto [x_out, x_in] = left_well_allowed_interval(left, E);
  auto f = [&](double x) {
    const double kinetic = E - left(x);
    return kinetic > 0.0 ? 1.0 / std::sqrt(kinetic) : 0.0;
  };
  const double period = numeric::integrate_from_turning_point(f, x_out, left.center) -
                        numeric::integrate_from_turning_point(f, x_in, left.center);
  return 2.0 * numeric::pi / period;
}

}  // namespace tunnelcatch
