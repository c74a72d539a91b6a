#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing here
// calls the root finders or quadrature of the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tunnelcatch/model.hpp"

namespace support {

constexpr double pi = 3.14159265358979323846;

/// The resonant scenario: HarmonicCap d = 1.5, omega = 2 centred at 0
/// (a = sqrt 1.5), square well at b = 3 with v = 1.5.
inline tunnelcatch::DoubleWellSpec resonant(double hbar, double w = 1.0) {
  return {tunnelcatch::PhysicalWellSpec::harmonic_cap(1.5, 2.0, 0.0), {3.0, w, 1.5}, hbar};
}

/// Plain bisection, used as an oracle independent of the library's solvers.
// Square well averaged over the cell [x - h/2, x + h/2]; a pointwise step
// converges only at first order on the grid.
inline std::function<double(double)> cell_averaged_square(double b, double w, double v, double h) {
  return [=](double x) {
    const double overlap = std::max(0.0, std::min(x + 0.5 * h, b + w) - std::max(x - 0.5 * h, b));
    return -v * overlap / h;
  };
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Finite square well levels from the textbook parity conditions
///   even: q tan(q w / 2 hbar) = p,   odd: -q cot(q w / 2 hbar) = p,
/// with q = sqrt(v + E), p = sqrt(-E). Roots are bracketed between the poles
/// of tan/cot in the variable z = q w / 2 hbar.
inline std::vector<double> parity_levels(double v, double w, double hbar) {
  const double z0 = w * std::sqrt(v) / (2.0 * hbar);
  std::vector<double> levels;
  // even roots: z tan z = sqrt(z0^2 - z^2), z in (n pi, n pi + pi/2)
  // odd roots: -z cot z = sqrt(z0^2 - z^2), z in (n pi + pi/2, (n + 1) pi)
  for (int n = 0;; ++n) {
    bool any = false;
    for (int parity = 0; parity < 2; ++parity) {
      const double lo = n * pi + parity * pi / 2.0;
      const double hi = lo + pi / 2.0;
      if (lo >= z0) continue;
      auto g = [&](double z) {
        const double rhs = std::sqrt(std::max(z0 * z0 - z * z, 0.0));
        return parity == 0 ? z * std::sin(z) - rhs * std::cos(z) : -z * std::cos(z) - rhs * std::sin(z);
      };
      const double top = std::min(hi, z0);
      // g changes sign on (lo, top) when a root exists there
      const double a = lo + 1e-15 * (1.0 + lo);
      if ((g(a) > 0.0) == (g(top) > 0.0)) continue;
      const double z = bisect(g, a, top);
      const double q = 2.0 * hbar * z / w;
      levels.push_back(q * q - v);
      any = true;
    }
    if (!any && n * pi >= z0) break;
  }
  std::sort(levels.begin(), levels.end());
  return levels;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs a shell command, capturing stdout and stderr separately.
inline CommandResult run(const std::string& command, const std::string& scratch) {
  const std::string out_file = scratch + "/stdout.txt";
  const std::string err_file = scratch + "/stderr.txt";
  const std::string full = "mkdir -p '" + scratch + "' && " + command + " >'" + out_file + "' 2>'" + err_file + "'";
  const int status = std::system(full.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

}  // namespace support
