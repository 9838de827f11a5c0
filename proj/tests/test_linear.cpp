#include <cmath>

#include "doctest.h"
#include "optimist/errors.hpp"
#include "optimist/linear.hpp"

using namespace optimist;

namespace {

FactoredLinearMDP scalar_model(double rho) {
  FactoredLinearMDP m;
  m.shape = {1, 1, 1};
  m.d = 1;
  m.phi = MatrixXd::Ones(1, 1);
  m.core = {MatrixXd::Ones(1, 1)};
  m.rho = {VectorXd::Constant(1, rho)};
  return m;
}

std::vector<VectorXd> random_ball_point(const LinearModelState& st, double eps, Rng& rng) {
  const Shape sh = st.shape();
  std::vector<VectorXd> B;
  for (int h = 0; h < sh.H; ++h)
    for (int a = 0; a < sh.A; ++a) {
      VectorXd v(st.dim());
      for (int j = 0; j < st.dim(); ++j) v(j) = rng.normal();
      const double norm = std::sqrt(v.dot(st.gram(h, a) * v));
      B.push_back(v * (eps * rng.uniform() / norm));
    }
  return B;
}

}  // namespace

TEST_CASE("one-hot factorisation reproduces the tabular model") {
  const TabularMDP mdp = make_random_mdp(4, 3, 2, 6);
  const FactoredLinearMDP f = generate_onehot_factored(mdp);
  CHECK(f.d == 4);
  CHECK(f.R == doctest::Approx(1.0));
  CHECK(f.C_P == doctest::Approx(1.0));
  const TabularMDP back = f.to_tabular();
  for (std::size_t i = 0; i < mdp.transitions().size(); ++i)
    CHECK(back.transitions()[i] == doctest::Approx(mdp.transitions()[i]).epsilon(1e-15));
  for (std::size_t i = 0; i < mdp.rewards().size(); ++i)
    CHECK(back.rewards()[i] == mdp.rewards()[i]);
}

TEST_CASE("random factored MDPs are realizable") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FactoredLinearMDP f = generate_random_factored(5, 2, 3, 3, seed);
    CHECK_NOTHROW(f.validate());
    CHECK(f.R <= 1.0 + 1e-12);
    CHECK(f.C_P == doctest::Approx(1.0));
    for (const MatrixXd& M : f.core) {
      const MatrixXd P = f.phi * M;
      for (int x = 0; x < 5; ++x) {
        CHECK(std::abs(P.row(x).sum() - 1.0) <= 1e-10);
        CHECK(P.row(x).minCoeff() >= 0.0);
      }
    }
    CHECK_NOTHROW(f.to_tabular());
  }
  FactoredLinearMDP broken = generate_random_factored(3, 1, 1, 2, 0);
  broken.core[0](0, 0) += 0.5;
  CHECK_THROWS_AS(broken.validate(), DomainError);
}

TEST_CASE("Gram updates") {
  LinearModelState st({3, 1, 1}, 3, 1.0);
  CHECK(st.gram(0, 0).isApprox(MatrixXd::Identity(3, 3)));
  const LinearModelState next = gram_update(st, 0, 0, VectorXd::Unit(3, 0));
  MatrixXd expected = MatrixXd::Identity(3, 3);
  expected(0, 0) = 2.0;
  CHECK(next.gram(0, 0).isApprox(expected));
  CHECK(next.gram_inverse(0, 0).isApprox(expected.inverse()));

  // det(Sigma_t) <= (lambda + t R^2 / d)^d <= (1 + t R^2 / lambda)^d lambda^d.
  Rng rng(4);
  const double lambda = 0.5;
  LinearModelState s({3, 1, 1}, 3, lambda);
  const int t = 300;
  for (int i = 0; i < t; ++i) s.gram_update(0, 0, VectorXd::Unit(3, rng.uniform_int(0, 2)));
  CHECK(s.gram(0, 0).determinant() <=
        std::pow(1.0 + t / lambda, 3) * std::pow(lambda, 3));
  CHECK(s.min_eigenvalue(0, 0) >= lambda - 1e-12);
  CHECK(s.gram_inverse(0, 0).isApprox(s.gram(0, 0).inverse(), 1e-10));
  CHECK((s.gram(0, 0) - s.gram(0, 0).transpose()).norm() == 0.0);
}

TEST_CASE("LSVI backup with no data is the prior") {
  const FactoredLinearMDP f = generate_random_factored(4, 2, 3, 3, 1);
  const LinearModelState st(f.shape, f.d, 2.0);
  const double alpha = 0.7;
  const LinearBackup b = lsvi_backup(f, st, alpha);
  for (int h = 0; h < 3; ++h) {
    for (int a = 0; a < 2; ++a) CHECK(b.theta_at(h, a).isApprox(f.rho[a]));
    for (int x = 0; x < 4; ++x) {
      double best = -1e9;
      for (int a = 0; a < 2; ++a)
        best = std::max(best, f.feature(x).dot(f.rho[a]) + alpha * f.feature(x).norm() / std::sqrt(2.0));
      CHECK(b.values(h, x) == doctest::Approx(std::min<double>(3 - h, best)));
    }
  }
}

TEST_CASE("one-hot ridge regression shrinks towards the prior") {
  const TabularMDP mdp = make_chain_mdp(3, 2);
  const FactoredLinearMDP f = generate_onehot_factored(mdp);
  LinearModelState st(f.shape, f.d, 1.0);
  const int n = 7;
  for (int i = 0; i < n; ++i) {
    st.gram_update(0, 1, f.feature(1));
    st.record_sample(0, 1, 1, 2);
  }
  const LinearBackup b = lsvi_backup(f, st, 0.0);
  const double target = b.values(1, 2);
  CHECK(b.theta_at(0, 1)(1) == doctest::Approx(mdp.reward(1, 1) + n * target / (n + 1.0)));
  CHECK(b.theta_at(0, 1)(0) == doctest::Approx(mdp.reward(0, 1)));
}

TEST_CASE("alpha schedule") {
  CHECK(alpha_schedule(1, 1, 1, 1, 1, 1, 0.5, 1) ==
        doctest::Approx(2.0 * std::sqrt(2.0 * std::log(10.0)) + 3.0));
  CHECK(std::abs(alpha_schedule(1, 1, 1, 1, 1, 1, 0.5, 1) - 7.2921) <= 1e-3);
  CHECK(alpha_schedule(3, 2, 5, 100, 1, 1, 0.1) < alpha_schedule(3, 2, 5, 1000, 1, 1, 0.1));
  CHECK(alpha_schedule(3, 2, 5, 100, 1, 1, 0.1) < alpha_schedule(3, 2, 6, 100, 1, 1, 0.1));
  CHECK(alpha_schedule(3, 2, 5, 100, 1, 1, 0.1) < alpha_schedule(4, 2, 5, 100, 1, 1, 0.1));
  CHECK_THROWS_AS(alpha_schedule(1, 1, 1, 1, 1, 1, 1.5), DomainError);
  CHECK(global_epsilon(2, 2, 3, 10, 1, 1, 0.1) > 0.0);
}

TEST_CASE("global bonus search") {
  const FactoredLinearMDP f = generate_random_factored(3, 2, 2, 2, 3);
  LinearModelState st(f.shape, f.d);
  Rng data(1);
  for (int i = 0; i < 20; ++i) {
    const int h = data.uniform_int(0, 1), a = data.uniform_int(0, 1), x = data.uniform_int(0, 2);
    st.gram_update(h, a, f.feature(x));
    st.record_sample(h, a, x, data.uniform_int(0, 2));
  }
  const std::vector<VectorXd> zero(4, VectorXd::Zero(2));
  const double g0 = global_objective(f, st, zero);

  Rng rng(5);
  const GlobalBonusResult none = global_bonus_search(f, st, 0.0, 10, rng);
  CHECK(none.value == g0);
  for (const VectorXd& b : none.B) CHECK(b.isZero());

  Rng r1(9), r2(9);
  const GlobalBonusResult small = global_bonus_search(f, st, 0.5, 8, r1);
  const GlobalBonusResult large = global_bonus_search(f, st, 0.5, 16, r2);
  CHECK(small.value >= g0);
  CHECK(large.value >= small.value);
  for (int h = 0; h < 2; ++h)
    for (int a = 0; a < 2; ++a) {
      const VectorXd& b = large.B[h * 2 + a];
      CHECK(std::sqrt(b.dot(st.gram(h, a) * b)) <= 0.5 + 1e-9);
    }
  CHECK_THROWS_AS(global_bonus_search(f, st, 0.5, 0, rng), DomainError);
}

TEST_CASE("one-dimensional global bonus peaks on the boundary") {
  const FactoredLinearMDP f = scalar_model(0.3);
  LinearModelState st(f.shape, 1);
  for (int i = 0; i < 3; ++i) st.gram_update(0, 0, VectorXd::Ones(1));
  Rng rng(2);
  const double eps = 0.8;
  const GlobalBonusResult g = global_bonus_search(f, st, eps, 16, rng);
  CHECK(g.B[0](0) == doctest::Approx(eps / std::sqrt(4.0)));
  CHECK(g.value == doctest::Approx(0.3 + eps / 2.0));
}

TEST_CASE("global objective is convex for one-hot features") {
  const FactoredLinearMDP f = generate_onehot_factored(make_random_mdp(3, 2, 3, 12));
  LinearModelState st(f.shape, f.d);
  Rng data(3);
  for (int i = 0; i < 40; ++i) {
    const int h = data.uniform_int(0, 2), a = data.uniform_int(0, 1), x = data.uniform_int(0, 2);
    st.gram_update(h, a, f.feature(x));
    st.record_sample(h, a, x, data.uniform_int(0, 2));
  }
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto B1 = random_ball_point(st, 1.5, rng);
    const auto B2 = random_ball_point(st, 1.5, rng);
    const double mu = rng.uniform();
    std::vector<VectorXd> mix;
    for (std::size_t i = 0; i < B1.size(); ++i) mix.push_back(mu * B1[i] + (1 - mu) * B2[i]);
    CHECK(global_objective(f, st, mix) <=
          mu * global_objective(f, st, B1) + (1 - mu) * global_objective(f, st, B2) + 1e-8);
  }
}

TEST_CASE("linear agents keep their invariants over a run") {
  const TabularMDP mdp = make_chain_mdp(4, 6);
  for (LinearAlgorithm alg : {LinearAlgorithm::kLocal, LinearAlgorithm::kGlobal}) {
    LinearAgentConfig cfg;
    cfg.algorithm = alg;
    cfg.episodes = 300;
    cfg.alpha_scale = 0.01;
    cfg.global_samples = 8;
    LinearAgent agent(generate_onehot_factored(mdp), cfg, 1);
    Rng rng(4);
    for (int t = 0; t < 300; ++t) {
      const LinearBackup& b = agent.plan();
      CHECK_NOTHROW(agent.observe(sample_episode(mdp, b.policy, rng)));
    }
    for (double s : agent.stage_bonus_sums()) CHECK(s <= agent.stage_bonus_bound());
    for (int h = 0; h < 6; ++h)
      for (int a = 0; a < 2; ++a) CHECK(agent.state().min_eigenvalue(h, a) >= 1.0 - 1e-9);
  }
}

TEST_CASE("random features drive agents end to end") {
  const FactoredLinearMDP f = generate_random_factored(5, 2, 4, 3, 8);
  const TabularMDP mdp = f.to_tabular();
  LinearAgentConfig cfg;
  cfg.episodes = 100;
  cfg.alpha_scale = 0.01;
  LinearAgent agent(f, cfg, 2);
  Rng rng(1);
  for (int t = 0; t < 100; ++t) agent.observe(sample_episode(mdp, agent.plan().policy, rng));
  CHECK(agent.state().episodes() == 100);
}
