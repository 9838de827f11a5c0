#include <algorithm>
#include <cmath>
#include <fstream>

#include "optimist/errors.hpp"
#include "optimist/mdp.hpp"
#include "optimist/mdp_io.hpp"
#include "optimist/rng.hpp"

namespace optimist {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double Rng::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

double Rng::gamma(double shape) {
  return std::gamma_distribution<double>(shape, 1.0)(engine_);
}

int Rng::uniform_int(int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(engine_);
}

int Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform() * total;
  double acc = 0.0;
  int last = 0;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

TabularMDP make_chain_mdp(int S, int H, const ChainParams& params) {
  if (S < 2) throw ShapeError("chain needs at least two states");
  if (params.success < 0.0 || params.slip_left < 0.0 ||
      params.success + params.slip_left > 1.0)
    throw DomainError("chain probabilities must form a distribution");
  const int A = 2;
  std::vector<double> r(S * A, 0.0);
  r[0 * A + 0] = params.small_reward;
  r[(S - 1) * A + 1] = params.large_reward;

  std::vector<double> row_left(S * S, 0.0), row_right(S * S, 0.0);
  for (int x = 0; x < S; ++x) {
    row_left[x * S + std::max(x - 1, 0)] = 1.0;
    row_right[x * S + std::min(x + 1, S - 1)] += params.success;
    row_right[x * S + std::max(x - 1, 0)] += params.slip_left;
    row_right[x * S + x] += 1.0 - params.success - params.slip_left;
  }
  std::vector<double> P(static_cast<std::size_t>(H) * S * A * S);
  for (int h = 0; h < H; ++h)
    for (int x = 0; x < S; ++x) {
      std::copy_n(row_left.begin() + x * S, S,
                  P.begin() + ((h * S + x) * A + 0) * S);
      std::copy_n(row_right.begin() + x * S, S,
                  P.begin() + ((h * S + x) * A + 1) * S);
    }
  return TabularMDP({S, A, H}, 0, std::move(r), std::move(P));
}

TabularMDP make_random_mdp(int S, int A, int H, std::uint64_t seed) {
  if (S < 1 || A < 1 || H < 1) throw ShapeError("invalid random MDP shape");
  Rng rng(seed, 0x6d6470);
  std::vector<double> r(S * A);
  for (double& v : r) v = rng.uniform();
  std::vector<double> P(static_cast<std::size_t>(H) * S * A * S);
  for (std::size_t row = 0; row < P.size(); row += S) {
    double total = 0.0;
    for (int y = 0; y < S; ++y) total += P[row + y] = rng.gamma(1.0);
    for (int y = 0; y < S; ++y) P[row + y] /= total;
  }
  return TabularMDP({S, A, H}, 0, std::move(r), std::move(P));
}

TabularMDP mdp_from_json(const nlohmann::json& doc) {
  try {
    const Shape sh{doc.at("S").get<int>(), doc.at("A").get<int>(),
                   doc.at("H").get<int>()};
    const int x1 = doc.value("x1", 0);
    const auto& jr = doc.at("r");
    if (jr.size() != static_cast<std::size_t>(sh.S))
      throw ShapeError("r must have S rows");
    std::vector<double> r;
    r.reserve(sh.S * sh.A);
    for (const auto& rx : jr) {
      if (rx.size() != static_cast<std::size_t>(sh.A))
        throw ShapeError("r rows must have A entries");
      for (const auto& v : rx) r.push_back(v.get<double>());
    }
    const auto& jp = doc.at("P");
    const std::size_t stages = jp.size();
    if (stages != static_cast<std::size_t>(sh.H) && stages != 1)
      throw ShapeError("P must have H stages (or one stationary stage)");
    std::vector<double> P;
    P.reserve(static_cast<std::size_t>(sh.H) * sh.S * sh.A * sh.S);
    for (int h = 0; h < sh.H; ++h) {
      const auto& ph = jp.at(stages == 1 ? 0 : h);
      if (ph.size() != static_cast<std::size_t>(sh.S))
        throw ShapeError("P stage must have S rows");
      for (const auto& px : ph) {
        if (px.size() != static_cast<std::size_t>(sh.A))
          throw ShapeError("P state must have A rows");
        for (const auto& pa : px) {
          if (pa.size() != static_cast<std::size_t>(sh.S))
            throw ShapeError("P rows must have S entries");
          for (const auto& v : pa) P.push_back(v.get<double>());
        }
      }
    }
    return TabularMDP(sh, x1, std::move(r), std::move(P));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed MDP document: ") + e.what());
  }
}

nlohmann::json mdp_to_json(const TabularMDP& mdp) {
  const Shape& sh = mdp.shape();
  nlohmann::json r = nlohmann::json::array();
  for (int x = 0; x < sh.S; ++x) {
    nlohmann::json rx = nlohmann::json::array();
    for (int a = 0; a < sh.A; ++a) rx.push_back(mdp.reward(x, a));
    r.push_back(std::move(rx));
  }
  nlohmann::json P = nlohmann::json::array();
  for (int h = 0; h < sh.H; ++h) {
    nlohmann::json ph = nlohmann::json::array();
    for (int x = 0; x < sh.S; ++x) {
      nlohmann::json px = nlohmann::json::array();
      for (int a = 0; a < sh.A; ++a) {
        const auto row = mdp.row(h, x, a);
        px.push_back(std::vector<double>(row.begin(), row.end()));
      }
      ph.push_back(std::move(px));
    }
    P.push_back(std::move(ph));
  }
  return {{"S", sh.S}, {"A", sh.A}, {"H", sh.H},
          {"x1", mdp.initial_state()}, {"r", r}, {"P", P}};
}

TabularMDP load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open MDP file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return mdp_from_json(doc);
}

}  // namespace optimist
