#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "optimist/errors.hpp"
#include "optimist/experiment.hpp"

namespace optimist {

using nlohmann::json;

namespace {

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void append_number(std::string& s, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

template <class Int>
void append_int(std::string& s, Int v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <class T>
T parse_field(const std::string& s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("malformed CSV field '" + s + "'");
  return v;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("environment")) {
      const json& e = j.at("environment");
      EnvironmentSpec& env = c.environment;
      read_if(e, "name", env.name);
      read_if(e, "S", env.S);
      read_if(e, "A", env.A);
      read_if(e, "H", env.H);
      read_if(e, "seed", env.seed);
      read_if(e, "path", env.path);
      read_if(e, "success", env.chain.success);
      read_if(e, "slip_left", env.chain.slip_left);
      read_if(e, "small_reward", env.chain.small_reward);
      read_if(e, "large_reward", env.chain.large_reward);
    }
    if (j.contains("algorithm"))
      c.algorithms = {j.at("algorithm").get<std::string>()};
    read_if(j, "algorithms", c.algorithms);
    read_if(j, "episodes", c.episodes);
    read_if(j, "delta", c.delta);
    read_if(j, "seeds", c.seeds);
    read_if(j, "output", c.output);
    read_if(j, "summary", c.summary);
    if (j.contains("alpha_scale") && !j.at("alpha_scale").is_null())
      c.alpha_scale = j.at("alpha_scale").get<double>();
    read_if(j, "features", c.features);
    read_if(j, "dim", c.dim);
    read_if(j, "global_samples", c.global_samples);
    read_if(j, "exact_kl", c.exact_kl);
    read_if(j, "reverse_kl_constant", c.reverse_kl_constant);
    read_if(j, "monitor_feasibility", c.monitor_feasibility);
    read_if(j, "log_bonus", c.log_bonus);
    read_if(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  const EnvironmentSpec& e = c.environment;
  json env = {{"name", e.name}, {"S", e.S}, {"A", e.A}, {"H", e.H}, {"seed", e.seed}};
  if (!e.path.empty()) env["path"] = e.path;
  json j = {{"environment", env},
            {"algorithms", c.algorithms},
            {"episodes", c.episodes},
            {"delta", c.delta},
            {"seeds", c.seeds},
            {"features", c.features},
            {"dim", c.dim},
            {"global_samples", c.global_samples},
            {"exact_kl", c.exact_kl},
            {"reverse_kl_constant", c.reverse_kl_constant},
            {"monitor_feasibility", c.monitor_feasibility},
            {"log_bonus", c.log_bonus}};
  if (c.alpha_scale) j["alpha_scale"] = *c.alpha_scale;
  if (!c.output.empty()) j["output"] = c.output;
  if (!c.summary.empty()) j["summary"] = c.summary;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void write_csv(std::ostream& out, const std::vector<RegretLog>& logs) {
  out << kCsvHeader << '\n';
  std::string line;
  for (const RegretLog& log : logs) {
    for (const EpisodeRecord& r : log.episodes) {
      line.clear();
      append_int(line, r.episode);
      line += ',';
      append_int(line, r.seed);
      line += ',';
      line += r.alg;
      for (double v : {r.vstar, r.vpi, r.ret, r.cum_regret, r.cum_bonus}) {
        line += ',';
        append_number(line, v);
      }
      line += ',';
      if (r.feasible) line += *r.feasible ? '1' : '0';
      line += '\n';
      out << line;
    }
  }
}

void export_results(const std::vector<RegretLog>& logs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  write_csv(out, logs);
  if (!out) throw ConfigError("write to " + path + " failed");
}

std::vector<EpisodeRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw ConfigError("CSV header does not match");
  std::vector<EpisodeRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw ConfigError("CSV row must have 9 fields");
    EpisodeRecord r;
    r.episode = parse_field<std::int64_t>(f[0]);
    r.seed = parse_field<std::uint64_t>(f[1]);
    r.alg = f[2];
    r.vstar = parse_field<double>(f[3]);
    r.vpi = parse_field<double>(f[4]);
    r.ret = parse_field<double>(f[5]);
    r.cum_regret = parse_field<double>(f[6]);
    r.cum_bonus = parse_field<double>(f[7]);
    if (f[8] == "1") r.feasible = true;
    else if (f[8] == "0") r.feasible = false;
    else if (!f[8].empty()) throw ConfigError("feasible must be 0, 1 or empty");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AlgorithmSummary> summarize(const std::vector<RegretLog>& logs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RegretLog*>> groups;
  for (const RegretLog& log : logs) {
    if (!groups.count(log.alg)) order.push_back(log.alg);
    groups[log.alg].push_back(&log);
  }
  std::vector<AlgorithmSummary> rows;
  for (const std::string& alg : order) {
    const auto& g = groups[alg];
    AlgorithmSummary s;
    s.alg = alg;
    s.runs = g.size();
    s.alpha_scale = g.front()->alpha_scale;
    s.theorem_alpha = g.front()->theorem_alpha;
    double sum = 0.0, ratio_sum = 0.0;
    std::int64_t infeasible = 0, episodes = 0;
    for (const RegretLog* log : g) {
      sum += log->final_regret();
      const std::int64_t K = static_cast<std::int64_t>(log->episodes.size());
      const double half = K >= 2 ? log->regret_at(K / 2) : 0.0;
      ratio_sum += half > 0.0 ? log->final_regret() / half : 1.0;
      infeasible += log->infeasible_episodes;
      episodes += K;
      s.optimism_violations += log->optimism_violations;
      const bool monitored =
          !log->episodes.empty() && log->episodes.front().feasible.has_value();
      if (monitored && log->all_feasible() && log->final_regret() > log->regub_bound())
        ++s.regub_violations;
    }
    const double n = static_cast<double>(s.runs);
    s.mean_final_regret = sum / n;
    s.mean_half_ratio = ratio_sum / n;
    s.infeasible_fraction = episodes > 0 ? static_cast<double>(infeasible) / episodes : 0.0;
    if (s.runs > 1) {
      double ss = 0.0;
      for (const RegretLog* log : g) {
        const double d = log->final_regret() - s.mean_final_regret;
        ss += d * d;
      }
      s.stderr_final_regret = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    rows.push_back(s);
  }
  return rows;
}

void write_summary(std::ostream& out, const std::vector<AlgorithmSummary>& rows) {
  out << "alg        runs  final_regret_mean  final_regret_stderr  ratio_K_over_K2"
         "  infeasible_frac  optimism_viol  regub_viol  alpha_scale\n";
  for (const AlgorithmSummary& s : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-10s %4zu  %17s  %19s  %15s  %15s  %13lld  %10zu  %s\n",
                  s.alg.c_str(), s.runs, fixed(s.mean_final_regret, 4).c_str(),
                  fixed(s.stderr_final_regret, 4).c_str(),
                  fixed(s.mean_half_ratio, 4).c_str(),
                  fixed(s.infeasible_fraction, 6).c_str(),
                  static_cast<long long>(s.optimism_violations), s.regub_violations,
                  fixed(s.alpha_scale, 6).c_str());
    out << buf;
  }
}

}  // namespace optimist
