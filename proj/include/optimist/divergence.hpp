#pragma once

#include <span>
#include <string>
#include <string_view>

// Divergences between a next-state distribution and a reference vector,
// their conjugates D*(z | eps, p_hat) = max { <z, p - p_hat> : p in simplex,
// D(p, p_hat) <= eps } and the closed-form upper bounds D*† used as
// exploration bonuses.

namespace optimist {

enum class DivergenceKind {
  kTotalVariation,        // ||p - p_hat||_1
  kVarianceWeightedLinf,  // max_x (p(x) - p_hat(x))^2 / p_hat(x)
  kForwardKL,             // unnormalised relative entropy KL(p || p_hat)
  kReverseKL,             // sum_x p_hat(x) log(p_hat(x) / p(x))
  kChiSquared,            // sum_x (p(x) - p_hat(x))^2 / p_hat(x)
};

inline constexpr DivergenceKind kAllDivergences[] = {
    DivergenceKind::kTotalVariation, DivergenceKind::kVarianceWeightedLinf,
    DivergenceKind::kForwardKL, DivergenceKind::kReverseKL,
    DivergenceKind::kChiSquared};

// Algorithm ids: tv, bernstein, kl, rkl, chi2.
std::string_view algorithm_id(DivergenceKind kind);
DivergenceKind parse_divergence(std::string_view id);

// True for the kinds centred on the smoothed model P̂⁺ (all but TV and
// reverse KL).
bool uses_smoothed_reference(DivergenceKind kind);

struct ConjugateInput {
  std::span<const double> z;          // V_{h+1} over next states
  double eps = 0.0;                   // confidence width
  std::span<const double> reference;  // P̂ or P̂⁺ row; need not sum to one
  double h_remaining = 0.0;           // bound on |z|, used by 2SH/N terms
  long visits = 0;                    // N(x, a)
  int num_states = 0;                 // S
};

double divergence(DivergenceKind kind, std::span<const double> p,
                  std::span<const double> reference);

double value_span(std::span<const double> z);
// sum_x w(x) (z(x) - <w, z>)^2 for a nonnegative weight vector w.
double empirical_variance(std::span<const double> z,
                          std::span<const double> weights);

struct GridConjugate {
  double value = 0.0;
  bool feasible = false;  // some lattice point satisfied the constraint
};

// Maximises <z, p - p_hat> over the lattice {k * grid_step} of the simplex,
// optionally followed by `refine_levels` rounds of local search on lattices
// ten times finer around the incumbent. Every candidate is checked exactly
// against the constraint, so the result is a lower bound on D*.
GridConjugate conjugate_bruteforce(DivergenceKind kind,
                                   const ConjugateInput& input,
                                   double grid_step, int refine_levels = 0);

// Closed-form upper bound D*†(z | eps, p_hat).
double conjugate_upper(DivergenceKind kind, const ConjugateInput& input);

// Exact forward-KL conjugate by line search over the Donsker-Varadhan dual
//   min_{lambda > 0} lambda log sum p⁺ e^{z/lambda} - <p⁺, z> + lambda eps',
// with eps' = eps + 1 - sum p⁺.
double conjugate_kl_linesearch(const ConjugateInput& input);

}  // namespace optimist
