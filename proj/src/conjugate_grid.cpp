#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "optimist/divergence.hpp"
#include "optimist/errors.hpp"

namespace optimist {

namespace {

constexpr double kConstraintSlack = 1e-12;

// Feasible points beat infeasible ones; among feasible, larger objective;
// among infeasible, smaller divergence.
struct Candidate {
  bool feasible = false;
  double objective = -std::numeric_limits<double>::infinity();
  double violation = std::numeric_limits<double>::infinity();
  std::vector<double> point;

  bool better_than(const Candidate& other) const {
    if (feasible != other.feasible) return feasible;
    if (feasible) return objective > other.objective;
    return violation < other.violation;
  }
};

class GridSearch {
 public:
  GridSearch(DivergenceKind kind, const ConjugateInput& in)
      : kind_(kind), in_(in), n_(in.z.size()),
        base_(std::inner_product(in.z.begin(), in.z.end(),
                                 in.reference.begin(), 0.0)) {}

  // Scores p and keeps it if it beats the incumbent.
  void offer(const std::vector<double>& p) {
    const double d = divergence(kind_, p, in_.reference);
    Candidate c;
    c.feasible = d <= in_.eps + kConstraintSlack;
    c.violation = d - in_.eps;
    if (c.feasible) {
      c.objective = std::inner_product(in_.z.begin(), in_.z.end(), p.begin(), 0.0) -
                    base_;
    }
    if (c.better_than(best_)) {
      c.point = p;
      best_ = std::move(c);
    }
  }

  void full_lattice(long n) {
    std::vector<long> k(n_, 0);
    std::vector<double> p(n_, 0.0);
    enumerate(0, n, n, k, p);
  }

  // Pattern search on a lattice of spacing `step` centred on the incumbent;
  // re-centres until the incumbent stops moving.
  void refine(double step, int radius) {
    for (int round = 0; round < 64; ++round) {
      const std::vector<double> anchor = best_.point;
      std::vector<int> offset(n_ - 1, -radius);
      std::vector<double> p(n_);
      for (;;) {
        double moved = 0.0;
        bool ok = true;
        for (std::size_t i = 0; i + 1 < n_; ++i) {
          p[i] = anchor[i] + offset[i] * step;
          moved += offset[i] * step;
          if (p[i] < 0.0) ok = false;
        }
        p[n_ - 1] = anchor[n_ - 1] - moved;
        if (p[n_ - 1] < 0.0) ok = false;
        if (ok) offer(p);
        std::size_t i = 0;
        while (i + 1 < n_ && ++offset[i] > radius) offset[i++] = -radius;
        if (i + 1 >= n_) break;
      }
      if (best_.point == anchor) break;
    }
  }

  // Continuous search from the incumbent. Along a direction d the feasible
  // steps form an interval [0, t*] (convex set), found by bisection. The
  // directions tried are the objective's tangent component at the boundary
  // tilted inward by beta, with beta scanned on a log grid.
  void polish() {
    if (!best_.feasible || n_ < 2) return;
    std::vector<double> d(n_), g(n_), c(n_), c0(n_), p(n_), q(n_);
    std::vector<bool> free(n_);
    auto divergence_at = [&](const std::vector<double>& x) {
      return divergence(kind_, x, in_.reference);
    };
    // Removes the mean over free coordinates and zeroes the rest.
    auto project = [&](std::vector<double>& v) {
      double mean = 0.0;
      int m = 0;
      for (std::size_t i = 0; i < n_; ++i)
        if (free[i]) mean += v[i], ++m;
      mean /= std::max(m, 1);
      double norm = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        v[i] = free[i] ? v[i] - mean : 0.0;
        norm += v[i] * v[i];
      }
      return std::sqrt(norm);
    };
    auto chord = [&](const std::vector<double>& anchor) {
      auto feasible_at = [&](double t) {
        for (std::size_t i = 0; i < n_; ++i) p[i] = std::max(anchor[i] + t * d[i], 0.0);
        return divergence_at(p) <= in_.eps + kConstraintSlack;
      };
      double hi = 2.0;
      for (std::size_t i = 0; i < n_; ++i)
        if (d[i] < 0.0) hi = std::min(hi, -anchor[i] / d[i]);
      double lo = 0.0;
      if (feasible_at(hi)) {
        lo = hi;
      } else {
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (feasible_at(mid) ? lo : hi) = mid;
        }
      }
      if (lo > 0.0 && feasible_at(lo)) offer(p);
    };
    for (int round = 0; round < 500; ++round) {
      const std::vector<double> anchor = best_.point;
      const double before = best_.objective;
      for (std::size_t i = 0; i < n_; ++i) free[i] = true;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n_; ++i) {
          q = anchor;
          const double h = 1e-7;
          q[i] = anchor[i] + h;
          const double up = divergence_at(q);
          q[i] = std::max(anchor[i] - h, 0.0);
          g[i] = (up - divergence_at(q)) / (anchor[i] + h - q[i]);
          c[i] = in_.z[i];
        }
        const double gn = project(g), cn = project(c);
        if (cn == 0.0) break;
        c0 = c;
        // Tangent component of the objective.
        double cg = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
          if (gn > 0.0) g[i] /= gn;
          cg += c[i] * g[i];
        }
        for (std::size_t i = 0; i < n_; ++i) c[i] -= (gn > 0.0 ? cg : 0.0) * g[i];
        // Coordinates at zero that the tangent would push negative leave the
        // free set; recompute once.
        bool changed = false;
        for (std::size_t i = 0; i < n_; ++i)
          if (free[i] && anchor[i] <= 0.0 && c[i] < 0.0) free[i] = false, changed = true;
        if (!changed) break;
      }
      const double un = project(c);
      // Straight up the objective first; this is the only option when the
      // tangent space is trivial.
      d = c0;
      if (project(d) > 0.0) chord(anchor);
      for (int k = 0; k <= 80; ++k) {
        const double beta = k == 80 ? 0.0 : std::pow(10.0, 2.0 - 0.125 * k);
        for (std::size_t i = 0; i < n_; ++i)
          d[i] = (un > 0.0 ? c[i] / un : 0.0) - beta * g[i];
        if (project(d) == 0.0) continue;
        chord(anchor);
      }
      if (!(best_.objective > before + 1e-15)) break;
    }
  }

  const Candidate& best() const { return best_; }

 private:
  void enumerate(std::size_t i, long remaining, long n, std::vector<long>& k,
                 std::vector<double>& p) {
    if (i + 1 == n_) {
      k[i] = remaining;
      p[i] = static_cast<double>(remaining) / n;
      offer(p);
      return;
    }
    for (long c = 0; c <= remaining; ++c) {
      k[i] = c;
      p[i] = static_cast<double>(c) / n;
      enumerate(i + 1, remaining - c, n, k, p);
    }
  }

  DivergenceKind kind_;
  const ConjugateInput& in_;
  std::size_t n_;
  double base_;
  Candidate best_;
};

}  // namespace

GridConjugate conjugate_bruteforce(DivergenceKind kind,
                                   const ConjugateInput& input,
                                   double grid_step, int refine_levels) {
  if (input.z.size() != input.reference.size() || input.z.empty())
    throw ShapeError("z and reference must have the same nonzero length");
  if (!(grid_step > 0.0 && grid_step <= 1.0))
    throw DomainError("grid_step must lie in (0, 1]");
  if (!(input.eps >= 0.0)) throw DomainError("confidence width must be >= 0");
  const long n = std::lround(1.0 / grid_step);
  GridSearch search(kind, input);
  search.full_lattice(n);
  if (input.z.size() > 1) {
    const int radius = input.z.size() <= 3 ? 20 : 8;
    double step = 1.0 / static_cast<double>(n);
    for (int level = 0; level < refine_levels; ++level) {
      step /= 10.0;
      search.refine(step, radius);
    }
    if (refine_levels > 0) search.polish();
  }
  const Candidate& best = search.best();
  if (!best.feasible) return {0.0, false};
  return {best.objective, true};
}

}  // namespace optimist
