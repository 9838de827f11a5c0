#pragma once

#include <span>

#include "optimist/divergence.hpp"
#include "optimist/mdp.hpp"
#include "optimist/tabular.hpp"

// Brute-force references for desk-scale instances.

namespace optimist {

// Largest number of lattice points primal/dual oracles will score.
inline constexpr double kOracleLatticeBudget = 2e9;

// max over grid rows P̃(h,x,a,.) with divergence <= width of the optimal
// value at x1. The maximisation separates per (h, x, a), so backward
// induction picks the best feasible lattice row against V_{h+1}. A lower
// bound on the primal optimum.
double primal_value_bruteforce(Shape shape, int x1, std::span<const double> rewards,
                               const ReferenceModel& ref, DivergenceKind kind,
                               std::span<const double> widths, double grid_step);

// Dual recursion V_h(x) = max_a min{H - h, r + <ref, V_{h+1}> + D*(V_{h+1})}
// with D* from the refined lattice search.
double dual_value_exact(Shape shape, int x1, std::span<const double> rewards,
                        const ReferenceModel& ref, DivergenceKind kind,
                        std::span<const double> widths, double grid_step = 1e-3,
                        int refine_levels = 3);

struct EnumeratedOptimum {
  double value = 0.0;  // V_1(x1)
  PolicyTable policy;
  long policies_checked = 0;
};

// Exhaustive search over deterministic Markov policies; needs A^{S H} <= 4096.
EnumeratedOptimum enumerate_policies(const TabularMDP& mdp);

}  // namespace optimist
