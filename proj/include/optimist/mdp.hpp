#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "optimist/rng.hpp"

// Finite episodic MDPs: representation, exact evaluation, optimal control,
// occupancy measures and trajectory sampling.
//
// Stages are 0-based in code: h = 0 .. H-1, with value tables carrying an
// extra terminal stage h = H that is identically zero. A value at stage h
// therefore lies in [0, H - h].

namespace optimist {

inline constexpr double kSimplexTolerance = 1e-12;

struct Shape {
  int S = 0;
  int A = 0;
  int H = 0;

  bool operator==(const Shape&) const = default;
};

class TabularMDP {
 public:
  // rewards: S*A entries indexed [x*A + a].
  // transitions: H*S*A*S entries indexed [((h*S + x)*A + a)*S + y].
  TabularMDP(Shape shape, int initial_state, std::vector<double> rewards,
             std::vector<double> transitions);

  const Shape& shape() const { return shape_; }
  int num_states() const { return shape_.S; }
  int num_actions() const { return shape_.A; }
  int horizon() const { return shape_.H; }
  int initial_state() const { return x1_; }

  double reward(int x, int a) const { return rewards_[x * shape_.A + a]; }
  double transition(int h, int x, int a, int y) const {
    return transitions_[row_offset(h, x, a) + y];
  }
  std::span<const double> row(int h, int x, int a) const {
    return {transitions_.data() + row_offset(h, x, a),
            static_cast<std::size_t>(shape_.S)};
  }

  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<double>& transitions() const { return transitions_; }

 private:
  std::size_t row_offset(int h, int x, int a) const {
    return ((static_cast<std::size_t>(h) * shape_.S + x) * shape_.A + a) *
           shape_.S;
  }

  Shape shape_;
  int x1_;
  std::vector<double> rewards_;
  std::vector<double> transitions_;
};

// Per-stage table over states with H + 1 stages; stage H is terminal.
class StageValues {
 public:
  StageValues() = default;
  StageValues(int H, int S) : H_(H), S_(S), data_((H + 1) * S, 0.0) {}

  int horizon() const { return H_; }
  int num_states() const { return S_; }

  double& operator()(int h, int x) { return data_[h * S_ + x]; }
  double operator()(int h, int x) const { return data_[h * S_ + x]; }
  std::span<const double> stage(int h) const {
    return {data_.data() + h * S_, static_cast<std::size_t>(S_)};
  }
  const std::vector<double>& data() const { return data_; }

 private:
  int H_ = 0;
  int S_ = 0;
  std::vector<double> data_;
};

// Markov policy, stored as action weights per (h, x). Deterministic policies
// put all their mass on one action.
class PolicyTable {
 public:
  PolicyTable() = default;

  static PolicyTable deterministic(Shape shape, std::vector<int> actions);
  static PolicyTable stochastic(Shape shape, std::vector<double> weights);
  static PolicyTable uniform(Shape shape);

  const Shape& shape() const { return shape_; }
  bool is_deterministic() const { return deterministic_; }

  double prob(int h, int x, int a) const {
    return weights_[(h * shape_.S + x) * shape_.A + a];
  }
  std::span<const double> weights(int h, int x) const {
    return {weights_.data() + (h * shape_.S + x) * shape_.A,
            static_cast<std::size_t>(shape_.A)};
  }
  // Most likely action, lowest index on ties.
  int action(int h, int x) const;

  bool operator==(const PolicyTable&) const = default;

 private:
  Shape shape_;
  bool deterministic_ = true;
  std::vector<double> weights_;
};

class OccupancyMeasure {
 public:
  OccupancyMeasure() = default;
  OccupancyMeasure(Shape shape, std::vector<double> q);

  const Shape& shape() const { return shape_; }
  double operator()(int h, int x, int a) const {
    return q_[(h * shape_.S + x) * shape_.A + a];
  }
  const std::vector<double>& data() const { return q_; }

 private:
  Shape shape_;
  std::vector<double> q_;
};

struct Transition {
  int h;
  int x;
  int a;
  double r;
  int next;

  bool operator==(const Transition&) const = default;
};
using Trajectory = std::vector<Transition>;

struct OptimalSolution {
  StageValues values;
  PolicyTable policy;
};

StageValues evaluate_policy(const TabularMDP& mdp, const PolicyTable& policy);

// Backward induction; argmax ties go to the lowest action index.
OptimalSolution solve_bellman_optimality(const TabularMDP& mdp);

OccupancyMeasure occupancy_of_policy(const TabularMDP& mdp,
                                     const PolicyTable& policy);

// Throws InvariantViolation unless every stage sums to one (1e-12) and the
// flow constraints hold (1e-10).
void check_occupancy(const TabularMDP& mdp, const OccupancyMeasure& q);

// <q, r> summed over stages.
double occupancy_reward(const TabularMDP& mdp, const OccupancyMeasure& q);

PolicyTable policy_from_occupancy(const OccupancyMeasure& q);

Trajectory sample_episode(const TabularMDP& mdp, const PolicyTable& policy,
                          Rng& rng);

// Built-in environments.
struct ChainParams {
  double success = 0.6;   // rightward move succeeds
  double slip_left = 0.1; // rightward action drifts back
  double small_reward = 0.05;
  double large_reward = 1.0;
};
TabularMDP make_chain_mdp(int S, int H, const ChainParams& params = {});
TabularMDP make_random_mdp(int S, int A, int H, std::uint64_t seed);

}  // namespace optimist
