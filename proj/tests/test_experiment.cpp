#include <cmath>
#include <sstream>

#include "doctest.h"
#include "optimist/errors.hpp"
#include "optimist/experiment.hpp"

using namespace optimist;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.environment.name = "chain";
  c.environment.S = 4;
  c.environment.H = 5;
  c.episodes = 40;
  c.seeds = {0, 1};
  c.algorithms = {"tv"};
  c.threads = 1;
  return c;
}

std::string csv_of(const std::vector<RegretLog>& logs) {
  std::ostringstream out;
  write_csv(out, logs);
  return out.str();
}

}  // namespace

TEST_CASE("configuration invariants") {
  ExperimentConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.episodes = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.delta = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.algorithms = {"ucb"};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.environment.name = "gridworld";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.features = "random";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("configuration JSON round trip") {
  ExperimentConfig c = small_config();
  c.alpha_scale = 0.25;
  c.algorithms = {"kl", "lsvi"};
  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(back.algorithms == c.algorithms);
  CHECK(back.episodes == c.episodes);
  CHECK(back.seeds == c.seeds);
  CHECK(*back.alpha_scale == 0.25);
  CHECK(back.environment.S == 4);
  const auto j = nlohmann::json::parse(R"({"algorithm":"chi2","episodes":3,"seeds":[5]})");
  const ExperimentConfig single = config_from_json(j);
  CHECK(single.algorithms == std::vector<std::string>{"chi2"});
  CHECK(!single.alpha_scale.has_value());
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"episodes":"many"})")),
                  ConfigError);
}

TEST_CASE("one episode yields one row") {
  ExperimentConfig c = small_config();
  c.episodes = 1;
  c.seeds = {0};
  const auto logs = run_experiment(c);
  REQUIRE(logs.size() == 1);
  CHECK(logs[0].episodes.size() == 1);
  CHECK(logs[0].T == 5);
}

TEST_CASE("the oracle policy has zero regret") {
  ExperimentConfig c = small_config();
  c.algorithms = {"oracle"};
  for (const RegretLog& log : run_experiment(c))
    for (const EpisodeRecord& r : log.episodes) CHECK(r.cum_regret == doctest::Approx(0.0));
}

TEST_CASE("export, parse and regret identity") {
  ExperimentConfig c = small_config();
  c.algorithms = {"tv", "lsvi", "random"};
  const auto logs = run_experiment(c);
  std::istringstream in(csv_of(logs));
  const auto rows = parse_csv(in);
  CHECK(rows.size() == 3 * 2 * 40);
  double cum = 0.0;
  std::string key;
  for (const EpisodeRecord& r : rows) {
    const std::string k = r.alg + "/" + std::to_string(r.seed);
    if (k != key) {
      key = k;
      cum = 0.0;
    }
    cum += r.vstar - r.vpi;
    CHECK(std::abs(cum - r.cum_regret) <= 1e-9);
    if (r.alg == "tv") CHECK(r.feasible.has_value());
    else CHECK(!r.feasible.has_value());
  }
  // Cumulative expected regret never decreases.
  for (const RegretLog& log : logs)
    for (std::size_t i = 1; i < log.episodes.size(); ++i)
      CHECK(log.episodes[i].cum_regret >= log.episodes[i - 1].cum_regret - 1e-12);
}

TEST_CASE("empty logs give a header-only CSV") {
  CHECK(csv_of({}) == std::string(kCsvHeader) + "\n");
  std::istringstream bad("episode,seed\n");
  CHECK_THROWS_AS(parse_csv(bad), ConfigError);
}

TEST_CASE("seeds are merged in ascending order and runs are reproducible") {
  ExperimentConfig c = small_config();
  c.seeds = {3, 1};
  const auto logs = run_experiment(c);
  REQUIRE(logs.size() == 2);
  CHECK(logs[0].seed == 1);
  CHECK(logs[1].seed == 3);
  const std::string a = csv_of(logs);
  c.threads = 3;
  CHECK(csv_of(run_experiment(c)) == a);
  c.seeds = {1, 3};
  CHECK(csv_of(run_experiment(c)) == a);
}

TEST_CASE("feasibility monitor") {
  const TabularMDP mdp = make_random_mdp(3, 2, 2, 4);
  const std::size_t cells = 2 * 3 * 2;
  const ReferenceModel exact = ReferenceModel::from_model(mdp);
  CHECK(monitor_feasibility(mdp, exact, DivergenceKind::kTotalVariation,
                            std::vector<double>(cells, 1e-3)));
  // No data: P̂⁺ is the all-ones vector and the flag is computed, not assumed.
  const ReferenceModel none = reference_model(VisitCounts(mdp.shape()));
  CHECK(!monitor_feasibility(mdp, none, DivergenceKind::kChiSquared,
                             std::vector<double>(cells, 0.1)));
  CHECK(monitor_feasibility(mdp, none, DivergenceKind::kChiSquared,
                            std::vector<double>(cells, 100.0)));
  CHECK(!monitor_feasibility(mdp, none, DivergenceKind::kTotalVariation,
                             std::vector<double>(cells, 0.5)));
}

TEST_CASE("summaries") {
  ExperimentConfig c = small_config();
  c.algorithms = {"tv", "random"};
  c.seeds = {0, 1, 2};
  const auto logs = run_experiment(c);
  const auto rows = summarize(logs);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].alg == "tv");
  CHECK(rows[0].runs == 3);
  double mean = 0.0;
  for (int i = 0; i < 3; ++i) mean += logs[i].final_regret() / 3.0;
  CHECK(rows[0].mean_final_regret == doctest::Approx(mean));
  CHECK(rows[0].alpha_scale == default_alpha_scale("tv"));
  std::ostringstream text;
  write_summary(text, rows);
  CHECK(text.str().find("random") != std::string::npos);
}

TEST_CASE("random features build a factored environment") {
  ExperimentConfig c = small_config();
  c.features = "random";
  c.dim = 2;
  c.algorithms = {"lsvi", "global", "chi2"};
  c.global_samples = 4;
  const Environment env = build_environment(c);
  CHECK(env.features.d == 2);
  CHECK(env.mdp.shape() == env.features.shape);
  CHECK(run_experiment(c).size() == 6);
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_thread_count(4, 2) == 2);
  CHECK(resolve_thread_count(1, 10) == 1);
  CHECK(resolve_thread_count(0, 10) >= 1);
}
