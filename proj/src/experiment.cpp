#include "optimist/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "optimist/errors.hpp"
#include "optimist/mdp_io.hpp"

namespace optimist {

const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> ids{"tv",   "bernstein", "kl",     "rkl",
                                            "chi2", "lsvi",      "global", "oracle",
                                            "random"};
  return ids;
}

bool is_tabular_algorithm(const std::string& id) {
  for (DivergenceKind k : kAllDivergences)
    if (algorithm_id(k) == id) return true;
  return false;
}

bool is_linear_algorithm(const std::string& id) {
  return id == "lsvi" || id == "global";
}

double default_alpha_scale(const std::string& id) {
  // Tuned on the 6-state chain with H = 20 and K = 5000.
  if (id == "tv") return 0.03;
  if (id == "bernstein") return 0.003;
  if (id == "kl") return 0.001;
  if (id == "rkl") return 0.003;
  if (id == "chi2") return 0.003;
  if (id == "lsvi") return 0.007;
  if (id == "global") return 0.005;
  return 1.0;
}

void ExperimentConfig::validate() const {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
  for (const std::string& a : algorithms) {
    const auto& ids = known_algorithms();
    if (std::find(ids.begin(), ids.end(), a) == ids.end())
      throw ConfigError("unknown algorithm '" + a + "'");
  }
  if (environment.name != "chain" && environment.name != "random" &&
      environment.name != "file")
    throw ConfigError("unknown environment '" + environment.name + "'");
  if (environment.name == "file" && environment.path.empty())
    throw ConfigError("file environment needs a path");
  if (features != "onehot" && features != "random")
    throw ConfigError("features must be onehot or random");
  if (features == "random" && dim < 1)
    throw ConfigError("random features need dim >= 1");
  if (alpha_scale && !(*alpha_scale >= 0.0))
    throw ConfigError("alpha-scale must be >= 0");
  if (global_samples < 1) throw ConfigError("global_samples must be >= 1");
}

double RegretLog::regret_at(std::int64_t k) const {
  if (k < 1 || k > static_cast<std::int64_t>(episodes.size()))
    throw DomainError("episode index out of range");
  return episodes[k - 1].cum_regret;
}

double RegretLog::regub_bound() const {
  const double cb = episodes.empty() ? 0.0 : episodes.back().cum_bonus;
  return 2.0 * cb + 4.0 * H * std::sqrt(2.0 * T * std::log(1.0 / delta));
}

bool monitor_feasibility(const TabularMDP& mdp, const ReferenceModel& ref,
                         DivergenceKind kind, std::span<const double> widths) {
  const Shape& sh = mdp.shape();
  if (!(ref.shape() == sh)) throw ShapeError("reference model shape mismatch");
  if (widths.size() != static_cast<std::size_t>(sh.H) * sh.S * sh.A)
    throw ShapeError("width table must have H*S*A entries");
  std::size_t c = 0;
  for (int h = 0; h < sh.H; ++h)
    for (int x = 0; x < sh.S; ++x)
      for (int a = 0; a < sh.A; ++a, ++c)
        if (!(divergence(kind, mdp.row(h, x, a), ref.reference_row(kind, h, x, a)) <=
              widths[c]))
          return false;
  return true;
}

Environment build_environment(const ExperimentConfig& config) {
  const EnvironmentSpec& e = config.environment;
  if (config.features == "random") {
    const int A = e.name == "chain" ? 2 : e.A;
    FactoredLinearMDP f = generate_random_factored(e.S, A, e.H, config.dim, e.seed);
    TabularMDP mdp = f.to_tabular();
    return {std::move(mdp), std::move(f)};
  }
  TabularMDP mdp = e.name == "chain"    ? make_chain_mdp(e.S, e.H, e.chain)
                   : e.name == "random" ? make_random_mdp(e.S, e.A, e.H, e.seed)
                                        : load_mdp(e.path);
  FactoredLinearMDP f = generate_onehot_factored(mdp);
  return {std::move(mdp), std::move(f)};
}

namespace {

double trajectory_return(const Trajectory& tr) {
  double r = 0.0;
  for (const Transition& t : tr) r += t.r;
  return r;
}

template <class BonusAt>
double trajectory_bonus(const Trajectory& tr, BonusAt bonus_at) {
  double b = 0.0;
  for (const Transition& t : tr) b += bonus_at(t.h, t.x, t.a);
  return b;
}

}  // namespace

RegretLog run_single(const Environment& env, const ExperimentConfig& config,
                     const std::string& alg, std::uint64_t seed) {
  const TabularMDP& mdp = env.mdp;
  const Shape sh = mdp.shape();
  const int x1 = mdp.initial_state();
  const OptimalSolution opt = solve_bellman_optimality(mdp);
  const double vstar = opt.values(0, x1);

  RegretLog log;
  log.alg = alg;
  log.seed = seed;
  log.T = config.episodes * sh.H;
  log.H = sh.H;
  log.delta = config.delta;
  log.alpha_scale = config.alpha_scale.value_or(default_alpha_scale(alg));
  log.episodes.reserve(config.episodes);
  log.optimistic_value.reserve(config.episodes);

  Rng rng(seed, 1);
  double cum_regret = 0.0, cum_bonus = 0.0;
  auto record = [&](std::int64_t t, const PolicyTable& policy, const Trajectory& tr,
                    double bonus, std::optional<bool> feasible, double optimistic) {
    const double vpi = evaluate_policy(mdp, policy)(0, x1);
    cum_regret += vstar - vpi;
    if (config.log_bonus) cum_bonus += bonus;
    log.episodes.push_back({t, seed, alg, vstar, vpi, trajectory_return(tr),
                            cum_regret, cum_bonus, feasible});
    log.optimistic_value.push_back(optimistic);
    if (feasible && !*feasible) ++log.infeasible_episodes;
    if (feasible && *feasible && optimistic < vstar - 1e-9) ++log.optimism_violations;
  };

  if (is_tabular_algorithm(alg)) {
    TabularAgentConfig ac;
    ac.kind = parse_divergence(alg);
    ac.delta = config.delta;
    ac.episodes = config.episodes;
    ac.bonus_scale = log.alpha_scale;
    ac.reverse_kl_constant = config.reverse_kl_constant;
    ac.exact_kl = config.exact_kl;
    TabularAgent agent(sh, mdp.rewards(), ac);
    for (std::int64_t t = 1; t <= config.episodes; ++t) {
      const ValuePolicyTable& table = agent.plan();
      std::optional<bool> feasible;
      if (config.monitor_feasibility)
        feasible = monitor_feasibility(mdp, agent.reference(), ac.kind, agent.widths());
      const Trajectory tr = sample_episode(mdp, table.policy, rng);
      const double bonus = trajectory_bonus(
          tr, [&](int h, int x, int a) { return table.bonus_at(h, x, a); });
      record(t, table.policy, tr, bonus, feasible, table.values(0, x1));
      agent.observe(tr);
    }
  } else if (is_linear_algorithm(alg)) {
    LinearAgentConfig lc;
    lc.algorithm = alg == "lsvi" ? LinearAlgorithm::kLocal : LinearAlgorithm::kGlobal;
    lc.delta = config.delta;
    lc.episodes = config.episodes;
    lc.alpha_scale = log.alpha_scale;
    lc.global_samples = config.global_samples;
    LinearAgent agent(env.features, lc, seed);
    log.theorem_alpha = agent.theorem_alpha();
    for (std::int64_t t = 1; t <= config.episodes; ++t) {
      const LinearBackup& b = agent.plan();
      const Trajectory tr = sample_episode(mdp, b.policy, rng);
      const double bonus = trajectory_bonus(tr, [&](int h, int x, int a) {
        return b.bonus[(static_cast<std::size_t>(h) * sh.S + x) * sh.A + a];
      });
      record(t, b.policy, tr, bonus, std::nullopt, b.values(0, x1));
      agent.observe(tr);
    }
  } else if (alg == "oracle" || alg == "random") {
    const PolicyTable policy = alg == "oracle" ? opt.policy : PolicyTable::uniform(sh);
    for (std::int64_t t = 1; t <= config.episodes; ++t) {
      const Trajectory tr = sample_episode(mdp, policy, rng);
      record(t, policy, tr, 0.0, std::nullopt, vstar);
    }
  } else {
    throw ConfigError("unknown algorithm '" + alg + "'");
  }
  return log;
}

int resolve_thread_count(int requested, std::size_t jobs) {
  int n = requested;
  if (n <= 0) {
    n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* cap = std::getenv("OPTIMIST_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(cap, &end, 10);
      if (end != cap && v >= 1) n = std::min<long>(n, v);
    }
  }
  return static_cast<int>(std::clamp<std::size_t>(n, 1, std::max<std::size_t>(jobs, 1)));
}

std::vector<RegretLog> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Environment env = build_environment(config);
  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  struct Job {
    std::string alg;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const std::string& a : config.algorithms)
    for (std::uint64_t s : seeds) jobs.push_back({a, s});

  std::vector<RegretLog> logs(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        logs[i] = run_single(env, config, jobs[i].alg, jobs[i].seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
        return;
      }
    }
  };
  const int n = resolve_thread_count(config.threads, jobs.size());
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return logs;
}

}  // namespace optimist
