#include "verify.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "optimist/divergence.hpp"
#include "optimist/errors.hpp"
#include "optimist/oracles.hpp"
#include "optimist/tabular.hpp"

namespace optimist::cli {

namespace {

struct Tally {
  std::ostream& out;
  int failures = 0;

  void report(const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS  " : "FAIL  ") << name << "  " << detail << '\n';
    if (!ok) ++failures;
  }
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// Reference model from a few sampled transitions per row of `mdp`.
ReferenceModel sampled_reference(const TabularMDP& mdp, Rng& rng) {
  const Shape sh = mdp.shape();
  VisitCounts counts(sh);
  for (int h = 0; h < sh.H; ++h)
    for (int x = 0; x < sh.S; ++x)
      for (int a = 0; a < sh.A; ++a) {
        const int n = rng.uniform_int(1, 12);
        for (int i = 0; i < n; ++i)
          counts.record(h, x, a, rng.categorical(mdp.row(h, x, a)));
      }
  return reference_model(counts);
}

std::vector<double> sampled_widths(const ReferenceModel& ref, DivergenceKind kind,
                                   Rng& rng) {
  const Shape sh = ref.shape();
  std::vector<double> w;
  for (int h = 0; h < sh.H; ++h)
    for (int x = 0; x < sh.S; ++x)
      for (int a = 0; a < sh.A; ++a) {
        const auto row = ref.reference_row(kind, h, x, a);
        double m = 0.0;
        for (double v : row) m += v;
        w.push_back(std::max(m - 1.0, 0.0) + 0.02 + 0.4 * rng.uniform());
      }
  return w;
}

}  // namespace

int run_verify(const VerifyOptions& options, std::ostream& out) {
  Tally tally{out};
  Rng rng(options.seed, 3);

  // Exhaustive policy search against backward induction.
  {
    double worst = 0.0;
    for (int i = 0; i < options.instances; ++i) {
      const int S = rng.uniform_int(1, 3), A = rng.uniform_int(1, 2),
                H = rng.uniform_int(1, 3);
      const TabularMDP mdp = make_random_mdp(S, A, H, options.seed * 1000 + i);
      const double brute = enumerate_policies(mdp).value;
      const double dp = solve_bellman_optimality(mdp).values(0, 0);
      worst = std::max(worst, std::abs(brute - dp));
    }
    tally.report("policy-enumeration", worst <= 1e-12, fmt("max |diff| = %.3e", worst));
  }

  // Duality sandwich: primal lattice <= exact dual <= inflated dual.
  for (DivergenceKind kind : {DivergenceKind::kTotalVariation, DivergenceKind::kForwardKL,
                              DivergenceKind::kChiSquared}) {
    double worst_gap = 0.0, worst_order = 0.0;
    for (int i = 0; i < options.instances; ++i) {
      const int S = rng.uniform_int(2, 3), A = rng.uniform_int(1, 2),
                H = rng.uniform_int(1, 3);
      const TabularMDP mdp = make_random_mdp(S, A, H, options.seed * 7919 + i);
      const ReferenceModel ref = sampled_reference(mdp, rng);
      const auto widths = sampled_widths(ref, kind, rng);
      const double primal = primal_value_bruteforce(mdp.shape(), 0, mdp.rewards(), ref,
                                                    kind, widths, options.grid_step);
      const double dual = dual_value_exact(mdp.shape(), 0, mdp.rewards(), ref, kind,
                                           widths, options.grid_step, 2);
      const double inflated =
          optimistic_backup(mdp.shape(), mdp.rewards(), ref, kind, widths).values(0, 0);
      worst_gap = std::max(worst_gap, dual - primal);
      worst_order = std::max({worst_order, primal - dual, dual - inflated - 1e-6});
    }
    tally.report(std::string("duality-sandwich-") + std::string(algorithm_id(kind)),
                 worst_order <= 0.0 && worst_gap <= 0.05,
                 fmt("max gap = %.4f, order slack = %.2e", worst_gap, worst_order));
  }

  // Closed-form conjugates dominate the lattice search.
  for (DivergenceKind kind : kAllDivergences) {
    double worst = 0.0;
    for (int i = 0; i < options.instances * 5; ++i) {
      const int n = rng.uniform_int(1, 3);
      std::vector<double> z(n), ref(n);
      double total = 0.0;
      for (int j = 0; j < n; ++j) {
        z[j] = 4.0 * rng.uniform() - 1.0;
        ref[j] = rng.gamma(1.0) + 1e-3;
        total += ref[j];
      }
      const long visits = rng.uniform_int(1, 20);
      for (double& r : ref) r /= total;
      if (uses_smoothed_reference(kind))
        for (double& r : ref) r = std::max(r, 1.0 / visits);
      double m = 0.0;
      for (double r : ref) m += r;
      const double eps = std::max(m - 1.0, 0.0) + 0.5 * rng.uniform();
      ConjugateInput in{z, eps, ref, 3.0, visits, n};
      const double upper = conjugate_upper(kind, in);
      const GridConjugate g = conjugate_bruteforce(kind, in, options.grid_step, 2);
      if (g.feasible) worst = std::max(worst, g.value - upper);
    }
    tally.report(std::string("conjugate-dominance-") + std::string(algorithm_id(kind)),
                 worst <= 1e-6, fmt("max (brute - upper) = %.3e", worst));
  }

  out << (tally.failures == 0 ? "all checks passed" : "some checks failed") << '\n';
  return tally.failures;
}

}  // namespace optimist::cli
