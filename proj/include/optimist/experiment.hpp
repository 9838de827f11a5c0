#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "optimist/divergence.hpp"
#include "optimist/linear.hpp"
#include "optimist/mdp.hpp"
#include "optimist/tabular.hpp"

// Episodic simulation, regret accounting and result export.

namespace optimist {

struct EnvironmentSpec {
  std::string name = "chain";  // chain | random | file
  int S = 6;
  int A = 2;
  int H = 20;
  std::uint64_t seed = 0;      // instance seed for generated environments
  std::string path;            // MDP JSON for name == "file"
  ChainParams chain;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  std::vector<std::string> algorithms{"tv"};
  std::int64_t episodes = 1000;
  double delta = 0.05;
  std::vector<std::uint64_t> seeds{0};
  std::string output;          // CSV path, empty for none
  std::string summary;         // summary path, empty for none
  // Unset: per-algorithm default from default_alpha_scale.
  std::optional<double> alpha_scale;
  std::string features = "onehot";  // onehot | random
  int dim = 0;                      // feature dimension for random features
  int global_samples = 32;
  bool exact_kl = false;
  double reverse_kl_constant = 18.0;
  bool monitor_feasibility = true;
  bool log_bonus = true;
  int threads = 0;  // 0: OPTIMIST_THREADS or hardware concurrency

  // Throws ConfigError unless K >= 1, delta in (0,1), at least one seed and
  // every algorithm id is known.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

// Ids accepted by run_experiment: the five divergences, lsvi, global, and the
// oracle / random reference policies.
const std::vector<std::string>& known_algorithms();
bool is_tabular_algorithm(const std::string& id);
bool is_linear_algorithm(const std::string& id);

// Bonus multiplier used when the configuration leaves it unset.
double default_alpha_scale(const std::string& id);

struct EpisodeRecord {
  std::int64_t episode = 0;  // 1-based
  std::uint64_t seed = 0;
  std::string alg;
  double vstar = 0.0;
  double vpi = 0.0;
  double ret = 0.0;
  double cum_regret = 0.0;
  double cum_bonus = 0.0;
  std::optional<bool> feasible;  // empty for agents without a confidence set
};

struct RegretLog {
  std::string alg;
  std::uint64_t seed = 0;
  std::int64_t T = 0;  // K * H
  int H = 0;
  double delta = 0.05;
  double alpha_scale = 1.0;
  double theorem_alpha = 0.0;  // linear agents only
  std::vector<EpisodeRecord> episodes;
  std::vector<double> optimistic_value;  // V†_1(x_1) per episode
  std::int64_t infeasible_episodes = 0;
  std::int64_t optimism_violations = 0;  // feasible episodes with V† < V* - 1e-9

  double final_regret() const {
    return episodes.empty() ? 0.0 : episodes.back().cum_regret;
  }
  // Regret after episode k (1-based).
  double regret_at(std::int64_t k) const;
  // cum_regret <= 2 cum_bonus + 4 H sqrt(2 T log(1/delta)).
  double regub_bound() const;
  bool all_feasible() const { return infeasible_episodes == 0; }
};

// True iff divergence(kind, P(h,x,a,.), reference row) <= width for every
// (h, x, a).
bool monitor_feasibility(const TabularMDP& mdp, const ReferenceModel& ref,
                         DivergenceKind kind, std::span<const double> widths);

struct Environment {
  TabularMDP mdp;
  FactoredLinearMDP features;
};

Environment build_environment(const ExperimentConfig& config);

RegretLog run_single(const Environment& env, const ExperimentConfig& config,
                     const std::string& alg, std::uint64_t seed);

// All (algorithm, seed) runs, ordered by algorithm as listed and ascending
// seed. Runs execute in parallel; the result does not depend on the thread
// count.
std::vector<RegretLog> run_experiment(const ExperimentConfig& config);

int resolve_thread_count(int requested, std::size_t jobs);

inline constexpr const char* kCsvHeader =
    "episode,seed,alg,vstar,vpi,return,cum_regret,cum_bonus,feasible";

void write_csv(std::ostream& out, const std::vector<RegretLog>& logs);
void export_results(const std::vector<RegretLog>& logs, const std::string& path);
std::vector<EpisodeRecord> parse_csv(std::istream& in);

struct AlgorithmSummary {
  std::string alg;
  std::size_t runs = 0;
  double mean_final_regret = 0.0;
  double stderr_final_regret = 0.0;
  double mean_half_ratio = 0.0;  // Reg(K) / Reg(K/2)
  double infeasible_fraction = 0.0;
  std::int64_t optimism_violations = 0;
  std::size_t regub_violations = 0;  // feasible runs breaking the bound
  double alpha_scale = 1.0;
  double theorem_alpha = 0.0;
};

std::vector<AlgorithmSummary> summarize(const std::vector<RegretLog>& logs);
void write_summary(std::ostream& out, const std::vector<AlgorithmSummary>& rows);

}  // namespace optimist
