#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "optimist/mdp.hpp"
#include "optimist/rng.hpp"

// Factored linear MDPs (P_{h,a} = Phi M_{h,a}, r_a = Phi rho_a) and the
// optimistic parametric Bellman recursion
//   theta_{h,a} = rho_a + Sigma_{h,a}^{-1} sum_k 1{a_k = a} phi(x_k) V_{h+1}(x'_k)
//   V_h(x)      = clip_[0, H-h] max_a <phi(x), theta_{h,a}> + CB_h(x, a).

namespace optimist {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct FactoredLinearMDP {
  Shape shape;
  int x1 = 0;
  int d = 0;
  MatrixXd phi;                // S x d, row x is phi(x)
  std::vector<MatrixXd> core;  // H*A matrices M_{h,a}, each d x S
  std::vector<VectorXd> rho;   // A reward parameters
  double R = 1.0;              // max ||phi(x)||
  double C_P = 1.0;            // max row l1 norm of M_{h,a}
  double C_r = 1.0;            // max ||rho_a||

  const MatrixXd& core_at(int h, int a) const { return core[h * shape.A + a]; }
  VectorXd feature(int x) const { return phi.row(x).transpose(); }

  // Throws unless every row of Phi M_{h,a} is a distribution (1e-10) and
  // Phi rho_a lies in [0, 1].
  void validate() const;
  TabularMDP to_tabular() const;
};

// Phi = I, M_{h,a}(x, .) = P(h, x, a, .), rho_a = r(., a).
FactoredLinearMDP generate_onehot_factored(const TabularMDP& mdp);

// Nonnegative l1-normalised feature rows and Dirichlet core rows, so every
// Phi M row is a mixture of distributions.
FactoredLinearMDP generate_random_factored(int S, int A, int H, int d,
                                           std::uint64_t seed);

// Gram matrices, their inverses and the aggregated regression history for
// each (h, a).
class LinearModelState {
 public:
  LinearModelState(Shape shape, int d, double lambda = 1.0);

  const Shape& shape() const { return shape_; }
  int dim() const { return d_; }
  double lambda() const { return lambda_; }
  std::int64_t episodes() const { return episodes_; }

  const MatrixXd& gram(int h, int a) const { return gram_[idx(h, a)]; }
  const MatrixXd& gram_inverse(int h, int a) const { return inverse_[idx(h, a)]; }

  // Sigma += phi phi^T with a Sherman-Morrison update of the inverse.
  void gram_update(int h, int a, const VectorXd& phi);
  // Records (x -> next) under (h, a) as a regression sample.
  void record_sample(int h, int a, int x, int next);
  // Marks the end of an episode; inverses are recomputed from scratch every
  // `refresh_period` episodes.
  void end_episode();
  void refresh_inverses();

  // ||phi||_{Sigma^{-1}_{h,a}}
  double bonus_norm(int h, int a, const VectorXd& phi) const;
  double min_eigenvalue(int h, int a) const;

  // Aggregated samples: entry [x * S + next] counts transitions x -> next.
  const std::vector<std::int64_t>& pair_counts(int h, int a) const {
    return pairs_[idx(h, a)];
  }

  static constexpr int refresh_period = 256;

 private:
  std::size_t idx(int h, int a) const {
    return static_cast<std::size_t>(h) * shape_.A + a;
  }

  Shape shape_;
  int d_;
  double lambda_;
  std::int64_t episodes_ = 0;
  std::vector<MatrixXd> gram_;
  std::vector<MatrixXd> inverse_;
  std::vector<std::vector<std::int64_t>> pairs_;
};

// Returns the state with the rank-one update applied.
LinearModelState gram_update(LinearModelState state, int h, int a,
                             const VectorXd& phi);

struct LinearBackup {
  std::vector<VectorXd> theta;  // H*A parameter vectors theta⁺_{h,a}
  StageValues values;
  PolicyTable policy;
  std::vector<double> bonus;    // CB used at (h, x, a)

  const VectorXd& theta_at(int h, int a) const {
    return theta[h * policy.shape().A + a];
  }
};

// Local bonuses alpha ||phi(x)||_{Sigma^{-1}_{h,a}}.
LinearBackup lsvi_backup(const FactoredLinearMDP& model,
                         const LinearModelState& state, double alpha);

// Global bonuses <phi(x), B_{h,a}>; B holds H*A vectors.
LinearBackup opb_backup_with_bonus_vectors(const FactoredLinearMDP& model,
                                           const LinearModelState& state,
                                           const std::vector<VectorXd>& B,
                                           bool clip = true);

double alpha_schedule(int d, int A, int H, std::int64_t K, double R, double C_P,
                      double delta, double lambda = 1.0);

// Ellipsoid radius for the global-bonus method.
double global_epsilon(int d, int A, int H, std::int64_t K, double R, double C_P,
                      double delta, double lambda = 1.0);

// G'(B): value at x1 of the unclipped OPB recursion with bonus <phi, B>.
double global_objective(const FactoredLinearMDP& model,
                        const LinearModelState& state,
                        const std::vector<VectorXd>& B);

struct GlobalBonusResult {
  std::vector<VectorXd> B;
  double value = 0.0;
};

// Best of B = 0 and `n_samples` draws from the product of ellipsoids
// {||B_{h,a}||_{Sigma_{h,a}} <= eps}. Approximate: returns a feasible point,
// so the value is at most the true maximum and at least G'(0).
GlobalBonusResult global_bonus_search(const FactoredLinearMDP& model,
                                      const LinearModelState& state, double eps,
                                      int n_samples, Rng& rng);

enum class LinearAlgorithm { kLocal, kGlobal };

struct LinearAgentConfig {
  LinearAlgorithm algorithm = LinearAlgorithm::kLocal;
  double delta = 0.05;
  std::int64_t episodes = 1;
  double lambda = 1.0;
  double alpha_scale = 1.0;
  int global_samples = 32;
};

// LSVI-UCB (local bonuses) or the sampled global-bonus variant.
class LinearAgent {
 public:
  LinearAgent(FactoredLinearMDP model, LinearAgentConfig config,
              std::uint64_t seed = 0);

  const LinearBackup& plan();
  LinearBackup plan_with_alpha(double alpha) const;
  void observe(const Trajectory& trajectory);

  // alpha (local) or the ellipsoid radius (global) given by the theorems.
  double theorem_alpha() const { return theorem_alpha_; }
  double alpha() const { return theorem_alpha_ * config_.alpha_scale; }
  const LinearModelState& state() const { return state_; }
  const FactoredLinearMDP& model() const { return model_; }

  // Per-stage sum of ||phi(x_{h,t})||_{Sigma^{-1}_{h,a,t-1}}, checked each
  // episode against 2 sqrt(d A t log(1 + t R^2 / lambda)).
  const std::vector<double>& stage_bonus_sums() const { return stage_sums_; }
  double stage_bonus_bound() const;

 private:
  void check_invariants(const LinearBackup& backup) const;

  FactoredLinearMDP model_;
  LinearAgentConfig config_;
  LinearModelState state_;
  Rng rng_;
  double theorem_alpha_;
  std::vector<double> stage_sums_;
  LinearBackup backup_;
};

}  // namespace optimist
