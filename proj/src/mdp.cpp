#include "optimist/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "optimist/errors.hpp"

namespace optimist {

namespace {

void check_shape(const Shape& shape) {
  if (shape.S < 1 || shape.A < 1 || shape.H < 1) {
    std::ostringstream msg;
    msg << "invalid MDP shape S=" << shape.S << " A=" << shape.A
        << " H=" << shape.H;
    throw ShapeError(msg.str());
  }
}

void check_simplex(std::span<const double> w, const char* what) {
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw DomainError(std::string(what) + ": negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": row sums to " << total;
    throw DomainError(msg.str());
  }
}

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void require_same_shape(const Shape& a, const Shape& b) {
  if (!(a == b)) throw ShapeError("policy shape does not match MDP shape");
}

}  // namespace

TabularMDP::TabularMDP(Shape shape, int initial_state,
                       std::vector<double> rewards,
                       std::vector<double> transitions)
    : shape_(shape),
      x1_(initial_state),
      rewards_(std::move(rewards)),
      transitions_(std::move(transitions)) {
  check_shape(shape_);
  if (x1_ < 0 || x1_ >= shape_.S) throw ShapeError("initial state out of range");
  if (rewards_.size() != static_cast<std::size_t>(shape_.S * shape_.A))
    throw ShapeError("reward table must have S*A entries");
  if (transitions_.size() !=
      static_cast<std::size_t>(shape_.H) * shape_.S * shape_.A * shape_.S)
    throw ShapeError("transition tensor must have H*S*A*S entries");
  for (double r : rewards_) {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("rewards must lie in [0,1]");
  }
  for (int h = 0; h < shape_.H; ++h)
    for (int x = 0; x < shape_.S; ++x)
      for (int a = 0; a < shape_.A; ++a) check_simplex(row(h, x, a), "P");
}

PolicyTable PolicyTable::deterministic(Shape shape, std::vector<int> actions) {
  check_shape(shape);
  if (actions.size() != static_cast<std::size_t>(shape.H * shape.S))
    throw ShapeError("deterministic policy needs H*S actions");
  PolicyTable p;
  p.shape_ = shape;
  p.deterministic_ = true;
  p.weights_.assign(static_cast<std::size_t>(shape.H) * shape.S * shape.A, 0.0);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 0 || actions[i] >= shape.A)
      throw ShapeError("policy action out of range");
    p.weights_[i * shape.A + actions[i]] = 1.0;
  }
  return p;
}

PolicyTable PolicyTable::stochastic(Shape shape, std::vector<double> weights) {
  check_shape(shape);
  if (weights.size() != static_cast<std::size_t>(shape.H) * shape.S * shape.A)
    throw ShapeError("stochastic policy needs H*S*A weights");
  PolicyTable p;
  p.shape_ = shape;
  p.weights_ = std::move(weights);
  p.deterministic_ = true;
  for (int hx = 0; hx < shape.H * shape.S; ++hx) {
    std::span<const double> w(p.weights_.data() + hx * shape.A, shape.A);
    check_simplex(w, "policy");
    if (std::count(w.begin(), w.end(), 1.0) != 1) p.deterministic_ = false;
  }
  return p;
}

PolicyTable PolicyTable::uniform(Shape shape) {
  check_shape(shape);
  return stochastic(shape, std::vector<double>(
                               static_cast<std::size_t>(shape.H) * shape.S *
                                   shape.A,
                               1.0 / shape.A));
}

int PolicyTable::action(int h, int x) const {
  return argmax_lowest(weights(h, x));
}

OccupancyMeasure::OccupancyMeasure(Shape shape, std::vector<double> q)
    : shape_(shape), q_(std::move(q)) {
  check_shape(shape_);
  if (q_.size() != static_cast<std::size_t>(shape_.H) * shape_.S * shape_.A)
    throw ShapeError("occupancy measure needs H*S*A entries");
  for (double v : q_) {
    if (!(v >= 0.0)) throw DomainError("occupancy entries must be nonnegative");
  }
}

StageValues evaluate_policy(const TabularMDP& mdp, const PolicyTable& policy) {
  const Shape& sh = mdp.shape();
  require_same_shape(sh, policy.shape());
  StageValues v(sh.H, sh.S);
  for (int h = sh.H - 1; h >= 0; --h) {
    const auto next = v.stage(h + 1);
    for (int x = 0; x < sh.S; ++x) {
      double total = 0.0;
      for (int a = 0; a < sh.A; ++a) {
        const double w = policy.prob(h, x, a);
        if (w == 0.0) continue;
        const auto p = mdp.row(h, x, a);
        total += w * (mdp.reward(x, a) +
                      std::inner_product(p.begin(), p.end(), next.begin(), 0.0));
      }
      v(h, x) = total;
    }
  }
  return v;
}

OptimalSolution solve_bellman_optimality(const TabularMDP& mdp) {
  const Shape& sh = mdp.shape();
  StageValues v(sh.H, sh.S);
  std::vector<int> actions(static_cast<std::size_t>(sh.H) * sh.S, 0);
  std::vector<double> q(sh.A);
  for (int h = sh.H - 1; h >= 0; --h) {
    const auto next = v.stage(h + 1);
    for (int x = 0; x < sh.S; ++x) {
      for (int a = 0; a < sh.A; ++a) {
        const auto p = mdp.row(h, x, a);
        q[a] = mdp.reward(x, a) +
               std::inner_product(p.begin(), p.end(), next.begin(), 0.0);
      }
      const int best = argmax_lowest(q);
      actions[h * sh.S + x] = best;
      v(h, x) = q[best];
    }
  }
  return {std::move(v), PolicyTable::deterministic(sh, std::move(actions))};
}

OccupancyMeasure occupancy_of_policy(const TabularMDP& mdp,
                                     const PolicyTable& policy) {
  const Shape& sh = mdp.shape();
  require_same_shape(sh, policy.shape());
  std::vector<double> q(static_cast<std::size_t>(sh.H) * sh.S * sh.A, 0.0);
  auto at = [&](int h, int x, int a) -> double& {
    return q[(h * sh.S + x) * sh.A + a];
  };
  std::vector<double> state(sh.S, 0.0);
  state[mdp.initial_state()] = 1.0;
  for (int h = 0; h < sh.H; ++h) {
    std::vector<double> next(sh.S, 0.0);
    for (int x = 0; x < sh.S; ++x) {
      if (state[x] == 0.0) continue;
      for (int a = 0; a < sh.A; ++a) {
        const double mass = state[x] * policy.prob(h, x, a);
        at(h, x, a) = mass;
        if (mass == 0.0) continue;
        const auto p = mdp.row(h, x, a);
        for (int y = 0; y < sh.S; ++y) next[y] += mass * p[y];
      }
    }
    state = std::move(next);
  }
  OccupancyMeasure result(sh, std::move(q));
  check_occupancy(mdp, result);
  return result;
}

void check_occupancy(const TabularMDP& mdp, const OccupancyMeasure& q) {
  const Shape& sh = mdp.shape();
  if (!(q.shape() == sh)) throw ShapeError("occupancy shape mismatch");
  for (int h = 0; h < sh.H; ++h) {
    double total = 0.0;
    for (int x = 0; x < sh.S; ++x)
      for (int a = 0; a < sh.A; ++a) total += q(h, x, a);
    if (std::abs(total - 1.0) > kSimplexTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "occupancy stage " << h << " sums to " << total;
      throw InvariantViolation(msg.str());
    }
  }
  for (int x = 0; x < sh.S; ++x) {
    double first = 0.0;
    for (int a = 0; a < sh.A; ++a) first += q(0, x, a);
    const double expected = x == mdp.initial_state() ? 1.0 : 0.0;
    if (std::abs(first - expected) > 1e-10)
      throw InvariantViolation("occupancy does not start at the initial state");
  }
  for (int h = 0; h + 1 < sh.H; ++h) {
    for (int y = 0; y < sh.S; ++y) {
      double inflow = 0.0;
      for (int x = 0; x < sh.S; ++x)
        for (int a = 0; a < sh.A; ++a)
          inflow += mdp.transition(h, x, a, y) * q(h, x, a);
      double outflow = 0.0;
      for (int a = 0; a < sh.A; ++a) outflow += q(h + 1, y, a);
      if (std::abs(inflow - outflow) > 1e-10)
        throw InvariantViolation("occupancy violates the flow constraint");
    }
  }
}

double occupancy_reward(const TabularMDP& mdp, const OccupancyMeasure& q) {
  const Shape& sh = mdp.shape();
  double total = 0.0;
  for (int h = 0; h < sh.H; ++h)
    for (int x = 0; x < sh.S; ++x)
      for (int a = 0; a < sh.A; ++a) total += q(h, x, a) * mdp.reward(x, a);
  return total;
}

PolicyTable policy_from_occupancy(const OccupancyMeasure& q) {
  const Shape& sh = q.shape();
  std::vector<double> w(static_cast<std::size_t>(sh.H) * sh.S * sh.A);
  for (int h = 0; h < sh.H; ++h) {
    for (int x = 0; x < sh.S; ++x) {
      double mass = 0.0;
      for (int a = 0; a < sh.A; ++a) mass += q(h, x, a);
      for (int a = 0; a < sh.A; ++a) {
        w[(h * sh.S + x) * sh.A + a] =
            mass > 0.0 ? q(h, x, a) / mass : 1.0 / sh.A;
      }
      // Renormalise against rounding so the simplex check holds to 1e-12.
      if (mass > 0.0) {
        double total = 0.0;
        for (int a = 0; a < sh.A; ++a) total += w[(h * sh.S + x) * sh.A + a];
        for (int a = 0; a < sh.A; ++a) w[(h * sh.S + x) * sh.A + a] /= total;
      }
    }
  }
  return PolicyTable::stochastic(sh, std::move(w));
}

Trajectory sample_episode(const TabularMDP& mdp, const PolicyTable& policy,
                          Rng& rng) {
  const Shape& sh = mdp.shape();
  require_same_shape(sh, policy.shape());
  Trajectory traj;
  traj.reserve(sh.H);
  int x = mdp.initial_state();
  for (int h = 0; h < sh.H; ++h) {
    const int a = policy.is_deterministic() ? policy.action(h, x)
                                            : rng.categorical(policy.weights(h, x));
    const int y = rng.categorical(mdp.row(h, x, a));
    traj.push_back({h, x, a, mdp.reward(x, a), y});
    x = y;
  }
  return traj;
}

}  // namespace optimist
