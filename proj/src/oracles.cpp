#include "optimist/oracles.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "optimist/errors.hpp"

namespace optimist {

namespace {

double lattice_size(int parts, double grid_step) {
  // C(n + parts - 1, parts - 1)
  const double n = std::round(1.0 / grid_step);
  double c = 1.0;
  for (int k = 1; k < parts; ++k) c = c * (n + k) / k;
  return c;
}

void check_inputs(Shape sh, int x1, std::span<const double> rewards,
                  const ReferenceModel& ref, std::span<const double> widths) {
  if (!(ref.shape() == sh)) throw ShapeError("reference model shape mismatch");
  if (x1 < 0 || x1 >= sh.S) throw ShapeError("initial state out of range");
  if (rewards.size() != static_cast<std::size_t>(sh.S) * sh.A)
    throw ShapeError("reward table must have S*A entries");
  if (widths.size() != static_cast<std::size_t>(sh.H) * sh.S * sh.A)
    throw ShapeError("width table must have H*S*A entries");
}

// Shared backward pass; best_shift(in) returns max over the searched rows of
// <p - ref, z>, or nothing when no row is feasible.
template <class Search>
double grid_recursion(Shape sh, int x1, std::span<const double> rewards,
                      const ReferenceModel& ref, DivergenceKind kind,
                      std::span<const double> widths, Search search) {
  StageValues v(sh.H, sh.S);
  for (int h = sh.H - 1; h >= 0; --h) {
    const auto next = v.stage(h + 1);
    const double cap = sh.H - h;
    for (int x = 0; x < sh.S; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < sh.A; ++a) {
        const std::size_t c = (static_cast<std::size_t>(h) * sh.S + x) * sh.A + a;
        const auto row = ref.reference_row(kind, h, x, a);
        ConjugateInput in{next, widths[c], row, cap - 1.0,
                          static_cast<long>(ref.visits(h, x, a)), sh.S};
        const GridConjugate g = search(in);
        if (!g.feasible) continue;
        const double base = std::inner_product(row.begin(), row.end(), next.begin(), 0.0);
        best = std::max(best, std::min(cap, rewards[x * sh.A + a] + base + g.value));
      }
      if (!std::isfinite(best))
        throw DomainError("confidence set has no lattice point for any action");
      v(h, x) = best;
    }
  }
  return v(0, x1);
}

}  // namespace

double primal_value_bruteforce(Shape sh, int x1, std::span<const double> rewards,
                               const ReferenceModel& ref, DivergenceKind kind,
                               std::span<const double> widths, double grid_step) {
  check_inputs(sh, x1, rewards, ref, widths);
  if (sh.S > 4 || sh.A > 3 || sh.H > 4)
    throw ResourceError("primal oracle limited to S <= 4, A <= 3, H <= 4");
  const double work =
      lattice_size(sh.S, grid_step) * static_cast<double>(sh.H) * sh.S * sh.A;
  if (work > kOracleLatticeBudget)
    throw ResourceError("primal oracle lattice exceeds the point budget");
  return grid_recursion(sh, x1, rewards, ref, kind, widths,
                        [&](const ConjugateInput& in) {
                          return conjugate_bruteforce(kind, in, grid_step, 0);
                        });
}

double dual_value_exact(Shape sh, int x1, std::span<const double> rewards,
                        const ReferenceModel& ref, DivergenceKind kind,
                        std::span<const double> widths, double grid_step,
                        int refine_levels) {
  check_inputs(sh, x1, rewards, ref, widths);
  if (sh.S > 4 || sh.A > 3 || sh.H > 4)
    throw ResourceError("dual oracle limited to S <= 4, A <= 3, H <= 4");
  const double work =
      lattice_size(sh.S, grid_step) * static_cast<double>(sh.H) * sh.S * sh.A;
  if (work > kOracleLatticeBudget)
    throw ResourceError("dual oracle lattice exceeds the point budget");
  return grid_recursion(sh, x1, rewards, ref, kind, widths,
                        [&](const ConjugateInput& in) {
                          return conjugate_bruteforce(kind, in, grid_step,
                                                      refine_levels);
                        });
}

EnumeratedOptimum enumerate_policies(const TabularMDP& mdp) {
  const Shape sh = mdp.shape();
  const int slots = sh.S * sh.H;
  double count = std::pow(static_cast<double>(sh.A), slots);
  if (count > 4096.0) throw ResourceError("more than 4096 deterministic policies");
  std::vector<int> actions(slots, 0);
  EnumeratedOptimum best;
  best.value = -std::numeric_limits<double>::infinity();
  for (;;) {
    const PolicyTable pi = PolicyTable::deterministic(sh, actions);
    const double v = evaluate_policy(mdp, pi)(0, mdp.initial_state());
    ++best.policies_checked;
    if (v > best.value) {
      best.value = v;
      best.policy = pi;
    }
    int i = 0;
    while (i < slots && ++actions[i] == sh.A) actions[i++] = 0;
    if (i == slots) break;
  }
  return best;
}

}  // namespace optimist
