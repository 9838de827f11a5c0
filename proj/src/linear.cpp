#include "optimist/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "optimist/errors.hpp"

namespace optimist {

namespace {

constexpr double kRealizabilityTolerance = 1e-10;

void dirichlet_row(Rng& rng, int n, double* out) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += (out[i] = rng.gamma(1.0));
  for (int i = 0; i < n; ++i) out[i] /= total;
}

void compute_constants(FactoredLinearMDP& m) {
  m.R = 0.0;
  for (int x = 0; x < m.shape.S; ++x) m.R = std::max(m.R, m.phi.row(x).norm());
  m.C_P = 0.0;
  for (const MatrixXd& M : m.core)
    for (int i = 0; i < M.rows(); ++i)
      m.C_P = std::max(m.C_P, M.row(i).lpNorm<1>());
  m.C_r = 0.0;
  for (const VectorXd& r : m.rho) m.C_r = std::max(m.C_r, r.norm());
}

}  // namespace

void FactoredLinearMDP::validate() const {
  const int S = shape.S, A = shape.A, H = shape.H;
  if (S < 1 || A < 1 || H < 1 || d < 1) throw ShapeError("empty factored MDP");
  if (phi.rows() != S || phi.cols() != d) throw ShapeError("Phi must be S x d");
  if (core.size() != static_cast<std::size_t>(H) * A)
    throw ShapeError("need H*A core matrices");
  if (rho.size() != static_cast<std::size_t>(A)) throw ShapeError("need A reward vectors");
  if (x1 < 0 || x1 >= S) throw ShapeError("initial state out of range");
  for (const MatrixXd& M : core) {
    if (M.rows() != d || M.cols() != S) throw ShapeError("core matrices must be d x S");
    const MatrixXd P = phi * M;
    for (int x = 0; x < S; ++x) {
      if (P.row(x).minCoeff() < -kRealizabilityTolerance ||
          std::abs(P.row(x).sum() - 1.0) > kRealizabilityTolerance)
        throw DomainError("Phi M row is not a probability vector");
    }
  }
  for (const VectorXd& r : rho) {
    if (r.size() != d) throw ShapeError("reward parameters must have d entries");
    const VectorXd rx = phi * r;
    if (rx.minCoeff() < -kRealizabilityTolerance ||
        rx.maxCoeff() > 1.0 + kRealizabilityTolerance)
      throw DomainError("Phi rho entries must lie in [0, 1]");
  }
}

TabularMDP FactoredLinearMDP::to_tabular() const {
  const int S = shape.S, A = shape.A, H = shape.H;
  std::vector<double> rewards(static_cast<std::size_t>(S) * A);
  for (int a = 0; a < A; ++a) {
    const VectorXd rx = phi * rho[a];
    for (int x = 0; x < S; ++x) rewards[x * A + a] = std::clamp(rx(x), 0.0, 1.0);
  }
  std::vector<double> P(static_cast<std::size_t>(H) * S * A * S);
  for (int h = 0; h < H; ++h)
    for (int a = 0; a < A; ++a) {
      const MatrixXd Ph = phi * core_at(h, a);
      for (int x = 0; x < S; ++x) {
        double total = 0.0;
        for (int y = 0; y < S; ++y) total += std::max(Ph(x, y), 0.0);
        for (int y = 0; y < S; ++y)
          P[((static_cast<std::size_t>(h) * S + x) * A + a) * S + y] =
              std::max(Ph(x, y), 0.0) / total;
      }
    }
  return TabularMDP(shape, x1, std::move(rewards), std::move(P));
}

FactoredLinearMDP generate_onehot_factored(const TabularMDP& mdp) {
  FactoredLinearMDP m;
  m.shape = mdp.shape();
  m.x1 = mdp.initial_state();
  const int S = m.shape.S, A = m.shape.A;
  m.d = S;
  m.phi = MatrixXd::Identity(S, S);
  for (int h = 0; h < m.shape.H; ++h)
    for (int a = 0; a < A; ++a) {
      MatrixXd M(S, S);
      for (int x = 0; x < S; ++x)
        for (int y = 0; y < S; ++y) M(x, y) = mdp.transition(h, x, a, y);
      m.core.push_back(std::move(M));
    }
  for (int a = 0; a < A; ++a) {
    VectorXd r(S);
    for (int x = 0; x < S; ++x) r(x) = mdp.reward(x, a);
    m.rho.push_back(std::move(r));
  }
  compute_constants(m);
  m.validate();
  return m;
}

FactoredLinearMDP generate_random_factored(int S, int A, int H, int d,
                                           std::uint64_t seed) {
  if (S < 1 || A < 1 || H < 1 || d < 1)
    throw ConfigError("random factored MDP needs S, A, H, d >= 1");
  Rng rng(seed, 0x6c696e);
  FactoredLinearMDP m;
  m.shape = {S, A, H};
  m.x1 = 0;
  m.d = d;
  m.phi.resize(S, d);
  std::vector<double> row(std::max(S, d));
  for (int x = 0; x < S; ++x) {
    dirichlet_row(rng, d, row.data());
    for (int j = 0; j < d; ++j) m.phi(x, j) = row[j];
  }
  for (int h = 0; h < H; ++h)
    for (int a = 0; a < A; ++a) {
      MatrixXd M(d, S);
      for (int i = 0; i < d; ++i) {
        dirichlet_row(rng, S, row.data());
        for (int y = 0; y < S; ++y) M(i, y) = row[y];
      }
      m.core.push_back(std::move(M));
    }
  for (int a = 0; a < A; ++a) {
    VectorXd r(d);
    for (int j = 0; j < d; ++j) r(j) = rng.uniform();
    m.rho.push_back(std::move(r));
  }
  compute_constants(m);
  m.validate();
  return m;
}

LinearModelState::LinearModelState(Shape shape, int d, double lambda)
    : shape_(shape), d_(d), lambda_(lambda) {
  if (d < 1) throw ShapeError("feature dimension must be >= 1");
  if (!(lambda > 0.0)) throw DomainError("ridge lambda must be positive");
  const std::size_t n = static_cast<std::size_t>(shape.H) * shape.A;
  gram_.assign(n, lambda * MatrixXd::Identity(d, d));
  inverse_.assign(n, MatrixXd::Identity(d, d) / lambda);
  pairs_.assign(n, std::vector<std::int64_t>(
                       static_cast<std::size_t>(shape.S) * shape.S, 0));
}

void LinearModelState::gram_update(int h, int a, const VectorXd& phi) {
  if (phi.size() != d_) throw ShapeError("feature has the wrong dimension");
  MatrixXd& G = gram_[idx(h, a)];
  MatrixXd& Ginv = inverse_[idx(h, a)];
  G.noalias() += phi * phi.transpose();
  const VectorXd u = Ginv * phi;
  Ginv.noalias() -= (u * u.transpose()) / (1.0 + phi.dot(u));
  Ginv = 0.5 * (Ginv + Ginv.transpose()).eval();
}

void LinearModelState::record_sample(int h, int a, int x, int next) {
  if (h < 0 || h >= shape_.H || a < 0 || a >= shape_.A || x < 0 ||
      x >= shape_.S || next < 0 || next >= shape_.S)
    throw ShapeError("sample index out of range");
  ++pairs_[idx(h, a)][static_cast<std::size_t>(x) * shape_.S + next];
}

void LinearModelState::end_episode() {
  ++episodes_;
  if (episodes_ % refresh_period == 0) refresh_inverses();
}

void LinearModelState::refresh_inverses() {
  for (std::size_t i = 0; i < gram_.size(); ++i) {
    Eigen::LLT<MatrixXd> llt(gram_[i]);
    if (llt.info() != Eigen::Success)
      throw NumericalError("Gram matrix lost positive definiteness");
    inverse_[i] = llt.solve(MatrixXd::Identity(d_, d_));
  }
}

double LinearModelState::bonus_norm(int h, int a, const VectorXd& phi) const {
  return std::sqrt(std::max(phi.dot(gram_inverse(h, a) * phi), 0.0));
}

double LinearModelState::min_eigenvalue(int h, int a) const {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram(h, a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

LinearModelState gram_update(LinearModelState state, int h, int a,
                             const VectorXd& phi) {
  state.gram_update(h, a, phi);
  return state;
}

namespace {

// theta_{h,a} = rho_a + Sigma^{-1} sum_{(x, y)} n(x, y) phi(x) V_{h+1}(y)
VectorXd regression_target(const FactoredLinearMDP& model,
                           const LinearModelState& state, int h, int a,
                           std::span<const double> next_values) {
  const int S = model.shape.S;
  VectorXd b = VectorXd::Zero(model.d);
  const auto& pairs = state.pair_counts(h, a);
  for (int x = 0; x < S; ++x) {
    double weight = 0.0;
    for (int y = 0; y < S; ++y)
      weight += static_cast<double>(pairs[static_cast<std::size_t>(x) * S + y]) *
                next_values[y];
    if (weight != 0.0) b.noalias() += weight * model.phi.row(x).transpose();
  }
  return model.rho[a] + state.gram_inverse(h, a) * b;
}

void require_compatible(const FactoredLinearMDP& model,
                        const LinearModelState& state) {
  if (!(model.shape == state.shape()) || model.d != state.dim())
    throw ShapeError("model and learner state disagree on dimensions");
}

// Shared backward pass; `bonus(h, a)` returns the bonus column over states.
template <class Bonus>
LinearBackup opb_recursion(const FactoredLinearMDP& model,
                           const LinearModelState& state, bool clip,
                           Bonus bonus) {
  require_compatible(model, state);
  const Shape sh = model.shape;
  LinearBackup out;
  out.theta.resize(static_cast<std::size_t>(sh.H) * sh.A);
  out.values = StageValues(sh.H, sh.S);
  out.bonus.assign(static_cast<std::size_t>(sh.H) * sh.S * sh.A, 0.0);
  std::vector<int> actions(static_cast<std::size_t>(sh.H) * sh.S, 0);
  for (int h = sh.H - 1; h >= 0; --h) {
    const auto next = out.values.stage(h + 1);
    VectorXd best = VectorXd::Constant(sh.S, -std::numeric_limits<double>::infinity());
    for (int a = 0; a < sh.A; ++a) {
      VectorXd& theta = out.theta[static_cast<std::size_t>(h) * sh.A + a];
      theta = regression_target(model, state, h, a, next);
      const VectorXd cb = bonus(h, a);
      const VectorXd q = model.phi * theta + cb;
      for (int x = 0; x < sh.S; ++x) {
        out.bonus[(static_cast<std::size_t>(h) * sh.S + x) * sh.A + a] = cb(x);
        if (q(x) > best(x)) {
          best(x) = q(x);
          actions[static_cast<std::size_t>(h) * sh.S + x] = a;
        }
      }
    }
    const double cap = sh.H - h;
    for (int x = 0; x < sh.S; ++x) {
      double v = best(x);
      if (clip) v = std::clamp(v, 0.0, cap);
      out.values(h, x) = v;
    }
  }
  out.policy = PolicyTable::deterministic(sh, std::move(actions));
  return out;
}

}  // namespace

LinearBackup lsvi_backup(const FactoredLinearMDP& model,
                         const LinearModelState& state, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
  return opb_recursion(model, state, true, [&](int h, int a) {
    const MatrixXd& inv = state.gram_inverse(h, a);
    VectorXd cb(model.shape.S);
    for (int x = 0; x < model.shape.S; ++x) {
      const VectorXd f = model.feature(x);
      cb(x) = alpha * std::sqrt(std::max(f.dot(inv * f), 0.0));
    }
    return cb;
  });
}

LinearBackup opb_backup_with_bonus_vectors(const FactoredLinearMDP& model,
                                           const LinearModelState& state,
                                           const std::vector<VectorXd>& B,
                                           bool clip) {
  if (B.size() != static_cast<std::size_t>(model.shape.H) * model.shape.A)
    throw ShapeError("need one bonus vector per (h, a)");
  return opb_recursion(model, state, clip, [&](int h, int a) -> VectorXd {
    const VectorXd& b = B[static_cast<std::size_t>(h) * model.shape.A + a];
    if (b.size() != model.d) throw ShapeError("bonus vector has the wrong dimension");
    return model.phi * b;
  });
}

double alpha_schedule(int d, int A, int H, std::int64_t K, double R, double C_P,
                      double delta, double lambda) {
  if (d < 1 || A < 1 || H < 1 || K < 1 || !(R > 0.0) || !(C_P > 0.0) ||
      !(lambda > 0.0))
    throw DomainError("alpha_schedule arguments must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  const double k = static_cast<double>(K);
  const double inner =
      d * std::log(1.0 + k * R * R / lambda) + std::log(H * A / delta) +
      d * A *
          (std::log(1.0 + 4.0 * H * k * k * R * R) +
           d * std::log(1.0 + 4.0 * R * R * R * k * k * k));
  return 2.0 * H * std::sqrt(inner) + C_P * (H * std::sqrt(d) + 1.0) + 1.0;
}

double global_epsilon(int d, int A, int H, std::int64_t K, double R, double C_P,
                      double delta, double lambda) {
  if (d < 1 || A < 1 || H < 1 || K < 1 || !(R > 0.0) || !(C_P > 0.0) ||
      !(lambda > 0.0))
    throw DomainError("global_epsilon arguments must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  const double k = static_cast<double>(K);
  const double inner = d * std::log(1.0 + k * R * R) +
                       d * A * std::log(1.0 + 4.0 * k * k * H * R * R * R) +
                       std::log(H * A / delta);
  return 2.0 * H * std::sqrt(inner) +
         std::sqrt(lambda) * (C_P * std::sqrt(d) + 1.0 + C_P);
}

double global_objective(const FactoredLinearMDP& model,
                        const LinearModelState& state,
                        const std::vector<VectorXd>& B) {
  return opb_backup_with_bonus_vectors(model, state, B, false)
      .values(0, model.x1);
}

GlobalBonusResult global_bonus_search(const FactoredLinearMDP& model,
                                      const LinearModelState& state, double eps,
                                      int n_samples, Rng& rng) {
  if (n_samples < 1) throw DomainError("n_samples must be >= 1");
  if (!(eps >= 0.0)) throw DomainError("ellipsoid radius must be >= 0");
  require_compatible(model, state);
  const Shape sh = model.shape;
  const int d = model.d;
  const std::size_t blocks = static_cast<std::size_t>(sh.H) * sh.A;

  GlobalBonusResult best;
  best.B.assign(blocks, VectorXd::Zero(d));
  best.value = global_objective(model, state, best.B);
  if (eps == 0.0) return best;

  // ||B||_Sigma = eps r for B = eps r L^{-T} u with Sigma = L L^T, |u| = 1.
  std::vector<MatrixXd> maps(blocks);
  for (int h = 0; h < sh.H; ++h)
    for (int a = 0; a < sh.A; ++a) {
      Eigen::LLT<MatrixXd> llt(state.gram(h, a));
      if (llt.info() != Eigen::Success)
        throw NumericalError("Gram matrix is not positive definite");
      maps[static_cast<std::size_t>(h) * sh.A + a] =
          llt.matrixU().solve(MatrixXd::Identity(d, d));
    }
  const double exponent = 1.0 / (static_cast<double>(d) * sh.A * sh.H);
  std::vector<VectorXd> B(blocks);
  for (int s = 0; s < n_samples; ++s) {
    // Every other draw sits on the boundary, where a convex objective peaks.
    const bool boundary = s % 2 == 0;
    for (std::size_t i = 0; i < blocks; ++i) {
      VectorXd u(d);
      for (int j = 0; j < d; ++j) u(j) = rng.normal();
      const double norm = u.norm();
      if (norm > 0.0) u /= norm;
      const double radius = boundary ? 1.0 : std::pow(rng.uniform(), exponent);
      B[i] = eps * radius * (maps[i] * u);
    }
    const double value = global_objective(model, state, B);
    if (value > best.value) {
      best.value = value;
      best.B = B;
    }
  }
  return best;
}

LinearAgent::LinearAgent(FactoredLinearMDP model, LinearAgentConfig config,
                         std::uint64_t seed)
    : model_(std::move(model)),
      config_(config),
      state_(model_.shape, model_.d, config.lambda),
      rng_(seed, 0x676c6f),
      stage_sums_(model_.shape.H, 0.0) {
  if (config_.episodes < 1) throw ConfigError("agent needs K >= 1");
  if (!(config_.alpha_scale >= 0.0)) throw ConfigError("alpha-scale must be >= 0");
  if (config_.global_samples < 1) throw ConfigError("global search needs >= 1 sample");
  model_.validate();
  const double R = std::max(model_.R, 1e-12);
  const double C_P = std::max(model_.C_P, 1e-12);
  theorem_alpha_ =
      config_.algorithm == LinearAlgorithm::kLocal
          ? alpha_schedule(model_.d, model_.shape.A, model_.shape.H,
                           config_.episodes, R, C_P, config_.delta, config_.lambda)
          : global_epsilon(model_.d, model_.shape.A, model_.shape.H,
                           config_.episodes, R, C_P, config_.delta, config_.lambda);
}

LinearBackup LinearAgent::plan_with_alpha(double alpha) const {
  return lsvi_backup(model_, state_, alpha);
}

const LinearBackup& LinearAgent::plan() {
  if (config_.algorithm == LinearAlgorithm::kLocal) {
    backup_ = lsvi_backup(model_, state_, alpha());
  } else {
    const GlobalBonusResult g = global_bonus_search(
        model_, state_, alpha(), config_.global_samples, rng_);
    backup_ = opb_backup_with_bonus_vectors(model_, state_, g.B, true);
  }
  check_invariants(backup_);
  return backup_;
}

void LinearAgent::check_invariants(const LinearBackup& backup) const {
  const Shape sh = model_.shape;
  for (int h = 0; h <= sh.H; ++h)
    for (int x = 0; x < sh.S; ++x) {
      const double v = backup.values(h, x);
      if (!(v >= 0.0 && v <= sh.H - h)) {
        std::ostringstream msg;
        msg << "linear optimistic value " << v << " outside [0, " << sh.H - h << "]";
        throw InvariantViolation(msg.str());
      }
    }
  const double t = static_cast<double>(state_.episodes());
  const double ceiling = model_.C_r + t * sh.H * model_.R / state_.lambda();
  for (const VectorXd& theta : backup.theta) {
    if (theta.norm() > ceiling * (1.0 + 1e-9) + 1e-9) {
      std::ostringstream msg;
      msg << "parameter norm " << theta.norm() << " exceeds " << ceiling;
      throw InvariantViolation(msg.str());
    }
  }
}

double LinearAgent::stage_bonus_bound() const {
  const double t = static_cast<double>(state_.episodes());
  return 2.0 * std::sqrt(model_.d * model_.shape.A * t *
                         std::log(1.0 + t * model_.R * model_.R / state_.lambda()));
}

void LinearAgent::observe(const Trajectory& trajectory) {
  std::vector<std::pair<int, int>> touched;
  for (const Transition& tr : trajectory) {
    const VectorXd f = model_.feature(tr.x);
    stage_sums_.at(tr.h) += state_.bonus_norm(tr.h, tr.a, f);
    state_.gram_update(tr.h, tr.a, f);
    state_.record_sample(tr.h, tr.a, tr.x, tr.next);
    touched.emplace_back(tr.h, tr.a);
  }
  state_.end_episode();
  for (const auto& [h, a] : touched) {
    const double mu = state_.min_eigenvalue(h, a);
    if (mu < state_.lambda() * (1.0 - 1e-9)) {
      std::ostringstream msg;
      msg << "Gram minimum eigenvalue " << mu << " below lambda";
      throw InvariantViolation(msg.str());
    }
  }
  const double bound = stage_bonus_bound();
  for (int h = 0; h < model_.shape.H; ++h) {
    if (stage_sums_[h] > bound + 1e-9) {
      std::ostringstream msg;
      msg << "stage " << h << " bonus sum " << stage_sums_[h] << " exceeds " << bound;
      throw InvariantViolation(msg.str());
    }
  }
}

}  // namespace optimist
