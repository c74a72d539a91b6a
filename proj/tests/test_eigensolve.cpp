#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "support.hpp"
#include "tunnelcatch/eigensolve.hpp"
#include "tunnelcatch/oracle.hpp"
#include "tunnelcatch/semiclassic.hpp"
#include "tunnelcatch/squarewell.hpp"

using namespace tunnelcatch;

namespace {

// Velocity Verlet for H = p^2 + V (dx/dt = 2p, dp/dt = -V'), period from
// successive upward crossings of the center.
double verlet_period(const PhysicalWellSpec& left, double E, double dt) {
  double x = left.center;
  double p = std::sqrt(E - left(x));
  double t = 0.0;
  double force = -left.derivative(x);
  std::vector<double> crossings;
  while (crossings.size() < 3) {
    const double x_old = x;
    p += 0.5 * dt * force;
    x += 2.0 * dt * p;
    force = -left.derivative(x);
    p += 0.5 * dt * force;
    t += dt;
    if (x_old < left.center && x >= left.center) {
      crossings.push_back(t - dt * (x - left.center) / (x - x_old));
    }
  }
  return crossings[2] - crossings[1];
}

Eigen::MatrixXd dense(const TridiagonalOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = op.diagonal(static_cast<std::size_t>(i));
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = op.off_diagonal();
  }
  return m;
}

}  // namespace

TEST(Grid, Construction) {
  const Grid g = make_grid(0.0, 2.0, 1.0, 1.0);
  EXPECT_EQ(g.n, 3u);
  EXPECT_DOUBLE_EQ(g.h, 1.0);
  EXPECT_EQ(g.nearest(1.2), 1u);
  const auto spec = support::resonant(0.15, 1.0);
  const double E = -0.8;
  const Grid sized = make_grid(spec, E, 1e-3, 2.0, 2.0);
  const double kappa = std::sqrt(-E) / spec.hbar;
  EXPECT_LE(sized.x_min, spec.left.support_lo - 3.0 / kappa);
  EXPECT_GE(sized.x_max, spec.right.right_edge() + 3.0 / kappa);
  EXPECT_THROW(make_grid(spec, E, 1e-3, 2.0, 0.5), Error);  // split inside the left well
}

TEST(Discretize, FreeThreeByThree) {
  const Grid g = make_grid(0.0, 2.0, 1.0, 1.0);
  const TridiagonalOperator op = discretize([](double) { return 0.0; }, g, 1.0);
  EXPECT_NEAR(eigenvalue(op, 0), 2.0 - std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(eigenvalue(op, 1), 2.0, 1e-13);
  EXPECT_NEAR(eigenvalue(op, 2), 2.0 + std::sqrt(2.0), 1e-13);
  EXPECT_DOUBLE_EQ(op.off_diagonal(), -1.0);
  EXPECT_DOUBLE_EQ(op.diagonal(1), 2.0);
}

TEST(Discretize, SturmCountMatchesDenseSpectrum) {
  const auto spec = support::resonant(0.3, 1.0);
  const Grid g = make_grid(-3.0, 6.0, 0.03, 2.0);
  const TridiagonalOperator op = discretize(spec, g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense(op), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues();
  for (double sigma : {-1.4, -1.0, -0.5, -0.1, 0.0, 0.5, 3.0, 50.0}) {
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) count += ev[i] < sigma ? 1 : 0;
    EXPECT_EQ(op.count_below(sigma), count) << sigma;
  }
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(eigenvalue(op, k), ev[static_cast<Eigen::Index>(k)], 1e-11);
}

TEST(BoundStates, SquareWellMatchesTranscendentalRoots) {
  const double v = 1.5;
  const double w = 0.5;
  const double hbar = 0.1;
  const SquareWellSpec well{3.0, w, v};
  const auto exact = squarewell::solve_levels(v, w, hbar);
  auto grid_levels = [&](double h) {
    const Grid g = make_grid(0.0, 6.5, h, 1.5);
    return solve_bound_states(discretize(support::cell_averaged_square(well.b, w, v, g.h), g, hbar), exact.size());
  };
  const auto coarse = grid_levels(4e-4);
  const auto fine = grid_levels(2e-4);
  for (std::size_t k = 0; k < exact.size(); ++k) {
    EXPECT_NEAR(richardson(coarse[k].energy, fine[k].energy), exact[k].energy, 1e-4);
  }
}

TEST(BoundStates, SecondOrderConvergence) {
  const SquareWellSpec well{3.0, 0.5, 1.5};
  auto level = [&](double h) {
    const Grid g = make_grid(0.0, 6.5, h, 1.5);
    return eigenvalue(discretize(support::cell_averaged_square(well.b, well.w, well.v, g.h), g, 0.1), 0);
  };
  const double e1 = level(4e-3);
  const double e2 = level(2e-3);
  const double e3 = level(1e-3);
  // successive differences shrink by about 4
  const double ratio = (e1 - e2) / (e2 - e3);
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.5);
}

TEST(BoundStates, SymmetricDoubleWellParity) {
  // two identical square wells mirrored about x = 0
  auto V = [](double x) {
    const double ax = std::abs(x);
    return (ax > 0.5 && ax < 1.5) ? -1.0 : 0.0;
  };
  const Grid g = make_grid(-5.0, 5.0, 2e-3, 0.0);
  const auto states = solve_bound_states(discretize(V, g, 0.15), 4);
  for (std::size_t j = 0; j < states.size(); ++j) {
    const auto& psi = states[j].psi;
    double even_defect = 0.0;
    double odd_defect = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      even_defect = std::max(even_defect, std::abs(psi[i] - psi[psi.size() - 1 - i]));
      odd_defect = std::max(odd_defect, std::abs(psi[i] + psi[psi.size() - 1 - i]));
    }
    // ground pair: even then odd
    const double defect = j % 2 == 0 ? even_defect : odd_defect;
    EXPECT_LE(defect, 1e-8) << "state " << j;
  }
  EXPECT_LT(states[1].energy - states[0].energy, states[2].energy - states[1].energy);
}

TEST(BoundStates, HarmonicLowLevels) {
  const PhysicalWellSpec left = PhysicalWellSpec::harmonic_cap(1.5, 2.0);
  const Grid g = make_grid(-3.0, 3.0, 1e-3, 2.0);
  const auto states = solve_bound_states(discretize([&](double x) { return left(x); }, g, 0.1), 4);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_NEAR(states[n].energy, -1.5 + 0.2 * (n + 0.5), 0.01) << n;
  }
}

TEST(BoundStates, NormalizationNodesOrthogonality) {
  const PhysicalWellSpec left = PhysicalWellSpec::harmonic_cap(1.5, 2.0);
  const Grid g = make_grid(-3.0, 3.0, 1e-3, 2.0);
  const auto states = solve_bound_states(discretize([&](double x) { return left(x); }, g, 0.1), 5);
  for (std::size_t i = 0; i < states.size(); ++i) {
    EXPECT_NEAR(inner_product(states[i], states[i]), 1.0, 1e-12);
    EXPECT_EQ(states[i].node_count, static_cast<int>(i));
    for (std::size_t j = 0; j < i; ++j) EXPECT_LE(std::abs(inner_product(states[i], states[j])), 1e-8);
  }
}

TEST(BoundStates, ResonantPairIsExponentiallyClose) {
  oracle::GridOptions opts;
  const auto ts = oracle::tune(support::resonant(0.15), opts);
  const TridiagonalOperator full = oracle::full_operator(ts);
  const auto pair = oracle::split_pair(full, ts);
  EXPECT_LT(pair.E1, ts.E_l);
  EXPECT_GT(pair.E2, ts.E_l);
  EXPECT_LT(pair.Delta, 1e-6);
  // the pair stays orthonormal even though its gap is tiny
  const auto states = solve_bound_states(full, pair.index + 2);
  const auto& a = states[pair.index];
  const auto& b = states[pair.index + 1];
  EXPECT_NEAR(inner_product(a, a), 1.0, 1e-12);
  EXPECT_NEAR(inner_product(b, b), 1.0, 1e-12);
  EXPECT_LE(std::abs(inner_product(a, b)), 1e-8);
}

TEST(BoundStates, NotEnoughBoundStates) {
  const Grid g = make_grid(0.0, 6.5, 1e-3, 1.5);
  const SquareWellSpec well{3.0, 0.5, 1.5};
  const TridiagonalOperator op = discretize([&](double x) { return well(x); }, g, 0.1);
  try {
    solve_bound_states(op, 50);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotEnoughBoundStates);
  }
}

TEST(ClassicalFrequency, HarmonicIsochronism) {
  const PhysicalWellSpec left = PhysicalWellSpec::harmonic_cap(1.5, 2.0);
  for (double E : {-1.45, -1.2, -0.5, -0.1}) EXPECT_NEAR(classical_frequency(left, E), 2.0, 1e-6) << E;
  const PhysicalWellSpec other = PhysicalWellSpec::harmonic_cap(0.8, 3.3, 0.4);
  EXPECT_NEAR(classical_frequency(other, -0.3), 3.3, 1e-6);
}

TEST(ClassicalFrequency, SmoothBumpAgainstTrajectory) {
  const PhysicalWellSpec left = PhysicalWellSpec::smooth_bump(1.5, -1.0, 1.0);
  const double E = -0.75;
  const double period = verlet_period(left, E, 2e-5);
  EXPECT_NEAR(classical_frequency(left, E) / (2.0 * support::pi / period), 1.0, 1e-4);
}
