#include "optimist/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "optimist/errors.hpp"

namespace optimist {

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw ShapeError("vectors must be nonempty and of equal length");
}

void require_positive(std::span<const double> reference, const char* what) {
  for (double v : reference) {
    if (!(v > 0.0))
      throw DomainError(std::string(what) +
                        " needs a strictly positive reference (use P̂⁺)");
  }
}

void require_nonnegative(std::span<const double> reference) {
  for (double v : reference) {
    if (!(v >= 0.0)) throw DomainError("reference entries must be nonnegative");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double mass(std::span<const double> w) {
  return std::accumulate(w.begin(), w.end(), 0.0);
}

double sup_norm(std::span<const double> z) {
  double m = 0.0;
  for (double v : z) m = std::max(m, std::abs(v));
  return m;
}

void check_input(const ConjugateInput& in) {
  require_same_size(in.z, in.reference);
  if (!(in.eps >= 0.0)) throw DomainError("confidence width must be >= 0");
  require_nonnegative(in.reference);
  for (double v : in.z) {
    if (!std::isfinite(v)) throw DomainError("z must be finite");
  }
}

// Lower-order term 2 S H / N shared by the Bernstein-type bounds.
double smoothing_term(const ConjugateInput& in) {
  if (in.visits < 1)
    throw DomainError("visit count N must be >= 1 for this bonus");
  const int S = in.num_states > 0 ? in.num_states
                                  : static_cast<int>(in.z.size());
  return 2.0 * S * in.h_remaining / static_cast<double>(in.visits);
}

}  // namespace

std::string_view algorithm_id(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::kTotalVariation: return "tv";
    case DivergenceKind::kVarianceWeightedLinf: return "bernstein";
    case DivergenceKind::kForwardKL: return "kl";
    case DivergenceKind::kReverseKL: return "rkl";
    case DivergenceKind::kChiSquared: return "chi2";
  }
  return "?";
}

DivergenceKind parse_divergence(std::string_view id) {
  for (DivergenceKind k : kAllDivergences) {
    if (algorithm_id(k) == id) return k;
  }
  throw ConfigError("unknown divergence id '" + std::string(id) + "'");
}

bool uses_smoothed_reference(DivergenceKind kind) {
  return kind != DivergenceKind::kTotalVariation &&
         kind != DivergenceKind::kReverseKL;
}

double divergence(DivergenceKind kind, std::span<const double> p,
                  std::span<const double> ref) {
  require_same_size(p, ref);
  require_nonnegative(ref);
  double total = 0.0;
  switch (kind) {
    case DivergenceKind::kTotalVariation:
      for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - ref[i]);
      return total;
    case DivergenceKind::kVarianceWeightedLinf:
      require_positive(ref, "variance-weighted divergence");
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - ref[i];
        total = std::max(total, d * d / ref[i]);
      }
      return total;
    case DivergenceKind::kForwardKL:
      require_positive(ref, "forward KL");
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) total += p[i] * std::log(p[i] / ref[i]);
        total += ref[i] - p[i];
      }
      return std::max(total, 0.0);
    case DivergenceKind::kReverseKL:
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (ref[i] == 0.0) continue;
        if (p[i] == 0.0) return std::numeric_limits<double>::infinity();
        total += ref[i] * std::log(ref[i] / p[i]);
      }
      return std::max(total, 0.0);
    case DivergenceKind::kChiSquared:
      require_positive(ref, "chi-squared divergence");
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - ref[i];
        total += d * d / ref[i];
      }
      return total;
  }
  return total;
}

double value_span(std::span<const double> z) {
  if (z.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  return *hi - *lo;
}

double empirical_variance(std::span<const double> z,
                          std::span<const double> weights) {
  require_same_size(z, weights);
  require_nonnegative(weights);
  const double mean = dot(weights, z);
  double var = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = z[i] - mean;
    var += weights[i] * d * d;
  }
  return var;
}

double conjugate_upper(DivergenceKind kind, const ConjugateInput& in) {
  check_input(in);
  const double m = mass(in.reference);
  switch (kind) {
    case DivergenceKind::kTotalVariation:
      // |1 - m| ||z|| covers rows whose P̂ is still the zero vector.
      return in.eps * value_span(in.z) / 2.0 + std::abs(1.0 - m) * sup_norm(in.z);

    case DivergenceKind::kVarianceWeightedLinf: {
      const double lower = smoothing_term(in);
      const double mean = dot(in.reference, in.z);
      double weighted = 0.0;
      for (std::size_t i = 0; i < in.z.size(); ++i)
        weighted += std::sqrt(in.reference[i]) * std::abs(in.z[i] - mean);
      return std::sqrt(in.eps) * weighted + lower;
    }

    case DivergenceKind::kForwardKL: {
      require_positive(in.reference, "forward KL");
      // lambda log sum p⁺ e^{(z-mu)/lambda} <= (m - 1) + W / lambda^2 when
      // lambda >= max |z - mu|; minimise lambda eps + W / lambda over that ray.
      const double mu = dot(in.reference, in.z) / m;
      double w = 0.0, c = 0.0;
      for (std::size_t i = 0; i < in.z.size(); ++i) {
        const double d = in.z[i] - mu;
        w += in.reference[i] * d * d;
        c = std::max(c, std::abs(d));
      }
      double core = 0.0;
      if (c > 0.0) {
        core = w >= in.eps * c * c ? 2.0 * std::sqrt(in.eps * w)
                                   : in.eps * c + w / c;
      }
      return core + std::abs(m - 1.0) * sup_norm(in.z);
    }

    case DivergenceKind::kReverseKL:
      return value_span(in.z) * std::sqrt(2.0 * in.eps) +
             std::abs(1.0 - m) * sup_norm(in.z);

    case DivergenceKind::kChiSquared: {
      const double lower = smoothing_term(in);
      return std::sqrt(in.eps * empirical_variance(in.z, in.reference)) + lower;
    }
  }
  return 0.0;
}

double conjugate_kl_linesearch(const ConjugateInput& in) {
  check_input(in);
  require_positive(in.reference, "forward KL");
  const auto& q = in.reference;
  const auto& z = in.z;
  const double m = mass(q);
  double eps_prime = in.eps + 1.0 - m;
  if (eps_prime < -1e-12)
    throw DomainError("eps' = eps + 1 - sum(p⁺) must be nonnegative");
  eps_prime = std::max(eps_prime, 0.0);
  if (eps_prime == 0.0 && std::abs(m - 1.0) <= 1e-12) return 0.0;

  const double zmax = *std::max_element(z.begin(), z.end());
  const double qz = dot(q, z);
  // lambda log sum q e^{z/lambda}, shifted by max z and evaluated with
  // expm1/log1p so that large lambda keeps full precision.
  auto objective = [&](double lambda) {
    double s = m - 1.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      s += q[i] * std::expm1((z[i] - zmax) / lambda);
    return zmax + lambda * std::log1p(s) - qz + lambda * eps_prime;
  };

  constexpr double kLow = 1e-6;
  constexpr double kTol = 1e-8;
  double hi = std::max({in.h_remaining, 1.0, value_span(z)});
  int expansions = 0;
  while (objective(2.0 * hi) < objective(hi)) {
    hi *= 2.0;
    if (++expansions > 200)
      throw NumericalError("KL line search: bracket did not close");
  }
  double a = kLow, b = 2.0 * hi;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  int iterations = 0;
  while (b - a > kTol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
    if (++iterations > 1000)
      throw NumericalError("KL line search did not converge");
  }
  const double limit_at_zero = zmax - qz;
  return std::min({fc, fd, objective(a), objective(b), objective(kLow),
                   limit_at_zero});
}

}  // namespace optimist
