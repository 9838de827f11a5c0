#include <cmath>

#include "doctest.h"
#include "optimist/errors.hpp"
#include "optimist/oracles.hpp"

using namespace optimist;

namespace {

ReferenceModel sampled_reference(const TabularMDP& mdp, Rng& rng, int max_visits) {
  const Shape sh = mdp.shape();
  VisitCounts counts(sh);
  for (int h = 0; h < sh.H; ++h)
    for (int x = 0; x < sh.S; ++x)
      for (int a = 0; a < sh.A; ++a) {
        const int n = rng.uniform_int(1, max_visits);
        for (int i = 0; i < n; ++i) counts.record(h, x, a, rng.categorical(mdp.row(h, x, a)));
      }
  return reference_model(counts);
}

// Random row satisfying D(p, ref) <= eps, by bisection along ref -> target.
std::vector<double> feasible_row(DivergenceKind kind, std::span<const double> ref,
                                 double eps, Rng& rng) {
  const std::size_t n = ref.size();
  double m = 0.0;
  for (double r : ref) m += r;
  std::vector<double> centre(n), target(n), p(n);
  for (std::size_t i = 0; i < n; ++i) centre[i] = ref[i] / m;
  double total = 0.0;
  for (double& t : target) total += (t = rng.gamma(1.0));
  for (double& t : target) t /= total;
  double lo = 0.0, hi = 1.0;
  auto at = [&](double s) {
    for (std::size_t i = 0; i < n; ++i) p[i] = (1 - s) * centre[i] + s * target[i];
    return divergence(kind, p, ref);
  };
  if (at(0.0) > eps) return {};
  for (int it = 0; it < 60; ++it) {
    const double mid = (lo + hi) / 2;
    (at(mid) <= eps ? lo : hi) = mid;
  }
  at(lo * rng.uniform());
  return p;
}

}  // namespace

TEST_CASE("point confidence sets reproduce V*") {
  const TabularMDP mdp = make_random_mdp(2, 2, 2, 3);
  const double vstar = solve_bellman_optimality(mdp).values(0, 0);
  const std::vector<double> zeros(2 * 2 * 2, 0.0), tiny(2 * 2 * 2, 1e-9);
  const ReferenceModel ref = ReferenceModel::from_model(mdp);
  // The lattice must contain P itself for the primal value to be exact.
  std::vector<double> P(mdp.transitions());
  for (double& v : P) v = std::round(v * 100.0) / 100.0;
  for (std::size_t i = 0; i < P.size(); i += 2) P[i + 1] = 1.0 - P[i];
  const TabularMDP grid_mdp(mdp.shape(), 0, mdp.rewards(), P);
  const double grid_vstar = solve_bellman_optimality(grid_mdp).values(0, 0);
  const ReferenceModel grid_ref = ReferenceModel::from_model(grid_mdp);
  CHECK(primal_value_bruteforce(grid_mdp.shape(), 0, grid_mdp.rewards(), grid_ref,
                                DivergenceKind::kTotalVariation, tiny, 1e-2) ==
        doctest::Approx(grid_vstar));
  CHECK(dual_value_exact(grid_mdp.shape(), 0, grid_mdp.rewards(), grid_ref,
                         DivergenceKind::kTotalVariation, zeros, 1e-2) ==
        doctest::Approx(grid_vstar));
  CHECK(optimistic_backup(mdp.shape(), mdp.rewards(), ref, DivergenceKind::kTotalVariation,
                          zeros)
            .values(0, 0) == doctest::Approx(vstar));
}

TEST_CASE("vacuous TV widths free every row") {
  const TabularMDP mdp = make_random_mdp(3, 2, 3, 7);
  Rng rng(1);
  const ReferenceModel ref = sampled_reference(mdp, rng, 5);
  const std::vector<double> wide(3 * 3 * 2, 2.0);
  // Every row may jump to the best next state.
  StageValues v(3, 3);
  for (int h = 2; h >= 0; --h) {
    double best_next = 0.0;
    for (int y = 0; y < 3; ++y) best_next = std::max(best_next, v(h + 1, y));
    for (int x = 0; x < 3; ++x)
      v(h, x) = std::max(mdp.reward(x, 0), mdp.reward(x, 1)) + best_next;
  }
  const double primal = primal_value_bruteforce(mdp.shape(), 0, mdp.rewards(), ref,
                                                DivergenceKind::kTotalVariation, wide, 1e-2);
  CHECK(primal == doctest::Approx(v(0, 0)));
  const double dual = dual_value_exact(mdp.shape(), 0, mdp.rewards(), ref,
                                       DivergenceKind::kTotalVariation, wide, 1e-2, 1);
  CHECK(dual == doctest::Approx(v(0, 0)));
}

TEST_CASE("tiny TV instance: dual minus primal lies in [0, 0.02]") {
  const TabularMDP mdp = make_random_mdp(2, 2, 2, 42);
  Rng rng(2);
  const ReferenceModel ref = sampled_reference(mdp, rng, 10);
  const std::vector<double> widths(2 * 2 * 2, 0.3);
  const double primal = primal_value_bruteforce(mdp.shape(), 0, mdp.rewards(), ref,
                                                DivergenceKind::kTotalVariation, widths, 1e-3);
  const double dual = dual_value_exact(mdp.shape(), 0, mdp.rewards(), ref,
                                       DivergenceKind::kTotalVariation, widths);
  const double inflated = optimistic_backup(mdp.shape(), mdp.rewards(), ref,
                                            DivergenceKind::kTotalVariation, widths)
                              .values(0, 0);
  CHECK(dual - primal >= 0.0);
  CHECK(dual - primal <= 0.02);
  CHECK(dual <= inflated + 1e-6);
}

TEST_CASE("exact dual dominates sampled feasible models") {
  for (DivergenceKind kind : {DivergenceKind::kTotalVariation, DivergenceKind::kChiSquared,
                              DivergenceKind::kForwardKL}) {
    const TabularMDP mdp = make_random_mdp(2, 2, 2, 5);
    Rng rng(11);
    const ReferenceModel ref = sampled_reference(mdp, rng, 8);
    std::vector<double> widths;
    for (int h = 0; h < 2; ++h)
      for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) {
          double m = 0.0;
          for (double r : ref.reference_row(kind, h, x, a)) m += r;
          widths.push_back(std::max(m - 1.0, 0.0) + 0.2);
        }
    const double dual = dual_value_exact(mdp.shape(), 0, mdp.rewards(), ref, kind, widths, 1e-2, 2);
    int checked = 0;
    for (int s = 0; s < 50; ++s) {
      std::vector<double> P;
      bool ok = true;
      for (int h = 0; h < 2 && ok; ++h)
        for (int x = 0; x < 2 && ok; ++x)
          for (int a = 0; a < 2 && ok; ++a) {
            const auto row = feasible_row(kind, ref.reference_row(kind, h, x, a),
                                          widths[(h * 2 + x) * 2 + a], rng);
            if (row.empty()) ok = false;
            P.insert(P.end(), row.begin(), row.end());
          }
      if (!ok) continue;
      ++checked;
      const TabularMDP sample(mdp.shape(), 0, mdp.rewards(), P);
      CHECK(solve_bellman_optimality(sample).values(0, 0) <= dual + 1e-6);
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("oracle budgets") {
  const TabularMDP big = make_random_mdp(5, 2, 2, 0);
  const std::vector<double> w(2 * 5 * 2, 0.1);
  const ReferenceModel ref = ReferenceModel::from_model(big);
  CHECK_THROWS_AS(primal_value_bruteforce(big.shape(), 0, big.rewards(), ref,
                                          DivergenceKind::kTotalVariation, w, 1e-2),
                  ResourceError);
  const TabularMDP ok = make_random_mdp(4, 3, 4, 0);
  const std::vector<double> w2(4 * 4 * 3, 0.1);
  CHECK_THROWS_AS(primal_value_bruteforce(ok.shape(), 0, ok.rewards(),
                                          ReferenceModel::from_model(ok),
                                          DivergenceKind::kTotalVariation, w2, 1e-4),
                  ResourceError);
}
