#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "optimist/divergence.hpp"
#include "optimist/errors.hpp"
#include "optimist/experiment.hpp"
#include "verify.hpp"

using namespace optimist;

namespace {

struct Overrides {
  std::string alg;
  std::string features;
  int dim = 0;
  double alpha_scale = -1.0;
  long long episodes = 0;
  int seeds = 0;
  std::string output;
  std::string summary;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--features", o.features, "feature map for linear agents")
      ->check(CLI::IsMember({"onehot", "random"}));
  cmd->add_option("--dim", o.dim, "feature dimension for random features");
  cmd->add_option("--alpha-scale", o.alpha_scale, "bonus multiplier for every agent");
  cmd->add_option("--episodes", o.episodes, "number of episodes K");
  cmd->add_option("--seeds", o.seeds, "use seeds 0..n-1");
  cmd->add_option("--output", o.output, "CSV output path");
  cmd->add_option("--summary", o.summary, "summary output path");
}

void apply(ExperimentConfig& c, const Overrides& o) {
  if (!o.alg.empty()) c.algorithms = {o.alg};
  if (!o.features.empty()) c.features = o.features;
  if (o.dim > 0) c.dim = o.dim;
  if (o.alpha_scale >= 0.0) c.alpha_scale = o.alpha_scale;
  if (o.episodes > 0) c.episodes = o.episodes;
  if (o.seeds > 0) {
    c.seeds.clear();
    for (int s = 0; s < o.seeds; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (!o.output.empty()) c.output = o.output;
  if (!o.summary.empty()) c.summary = o.summary;
  c.validate();
}

int execute(const ExperimentConfig& config) {
  const std::vector<RegretLog> logs = run_experiment(config);
  if (!config.output.empty()) export_results(logs, config.output);
  const auto rows = summarize(logs);
  std::ostringstream text;
  write_summary(text, rows);
  std::cout << text.str();
  if (!config.summary.empty()) {
    std::ofstream out(config.summary, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + config.summary);
    out << text.str();
  }
  return 0;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimistic exploration for episodic MDPs"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides run_o;
  CLI::App* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("--config", config_path, "experiment configuration")->required();
  run->add_option("--alg", run_o.alg, "override the algorithm")
      ->check(CLI::IsMember(known_algorithms()));
  add_overrides(run, run_o);

  std::string algs = "tv,bernstein,kl,rkl,chi2,lsvi";
  std::string sweep_config;
  Overrides sweep_o;
  CLI::App* sweep = app.add_subcommand("sweep", "compare several algorithms");
  sweep->add_option("--algs", algs, "comma-separated algorithm ids");
  sweep->add_option("--config", sweep_config, "base configuration");
  add_overrides(sweep, sweep_o);

  cli::VerifyOptions vopt;
  CLI::App* verify = app.add_subcommand("verify", "run the oracle suite");
  verify->add_option("--instances", vopt.instances, "instances per check");
  verify->add_option("--grid-step", vopt.grid_step, "lattice spacing");
  verify->add_option("--seed", vopt.seed, "instance seed");

  std::string kind_id = "tv", z_list, ref_list;
  double eps = 0.1, h_remaining = 1.0, grid_step = 1e-3;
  long visits = 1;
  CLI::App* conj = app.add_subcommand("conjugate", "evaluate one conjugate bonus");
  conj->add_option("--kind", kind_id, "divergence id")->check(
      CLI::IsMember({"tv", "bernstein", "kl", "rkl", "chi2"}));
  conj->add_option("--z", z_list, "comma-separated values")->required();
  conj->add_option("--ref", ref_list, "comma-separated reference row")->required();
  conj->add_option("--eps", eps, "confidence width");
  conj->add_option("--visits", visits, "visit count N");
  conj->add_option("--h-remaining", h_remaining, "remaining horizon");
  conj->add_option("--grid-step", grid_step, "lattice spacing for the brute force");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ExperimentConfig c = load_config(config_path);
      apply(c, run_o);
      return execute(c);
    }
    if (sweep->parsed()) {
      ExperimentConfig c;
      if (!sweep_config.empty()) c = load_config(sweep_config);
      c.algorithms.clear();
      std::stringstream ss(algs);
      std::string id;
      while (std::getline(ss, id, ',')) c.algorithms.push_back(id);
      apply(c, sweep_o);
      return execute(c);
    }
    if (verify->parsed()) {
      return cli::run_verify(vopt, std::cout) == 0 ? 0 : 1;
    }
    if (conj->parsed()) {
      const DivergenceKind kind = parse_divergence(kind_id);
      const auto z = parse_list(z_list);
      const auto ref = parse_list(ref_list);
      ConjugateInput in{z, eps, ref, h_remaining, visits, static_cast<int>(z.size())};
      std::printf("upper       %.10g\n", conjugate_upper(kind, in));
      const GridConjugate g = conjugate_bruteforce(kind, in, grid_step, 2);
      if (g.feasible) std::printf("bruteforce  %.10g\n", g.value);
      else std::printf("bruteforce  infeasible\n");
      if (kind == DivergenceKind::kForwardKL)
        std::printf("linesearch  %.10g\n", conjugate_kl_linesearch(in));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
