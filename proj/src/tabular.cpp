#include "optimist/tabular.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "optimist/errors.hpp"

namespace optimist {

VisitCounts::VisitCounts(Shape shape)
    : shape_(shape),
      n3_(static_cast<std::size_t>(shape.H) * shape.S * shape.A * shape.S, 0),
      n2_(static_cast<std::size_t>(shape.H) * shape.S * shape.A, 0) {}

void VisitCounts::record(int h, int x, int a, int next) {
  if (h < 0 || h >= shape_.H || x < 0 || x >= shape_.S || a < 0 ||
      a >= shape_.A || next < 0 || next >= shape_.S)
    throw ShapeError("transition index out of range");
  ++n3_[cell(h, x, a) * shape_.S + next];
  ++n2_[cell(h, x, a)];
}

void VisitCounts::record(const Trajectory& trajectory) {
  for (const Transition& t : trajectory) record(t.h, t.x, t.a, t.next);
}

VisitCounts update_counts(VisitCounts counts, const Trajectory& trajectory) {
  counts.record(trajectory);
  return counts;
}

ReferenceModel::ReferenceModel(Shape shape, std::vector<double> p_hat,
                               std::vector<double> p_hat_plus,
                               std::vector<std::int64_t> visits)
    : shape_(shape),
      p_hat_(std::move(p_hat)),
      p_hat_plus_(std::move(p_hat_plus)),
      visits_(std::move(visits)) {
  const std::size_t cells = static_cast<std::size_t>(shape_.H) * shape_.S * shape_.A;
  if (p_hat_.size() != cells * shape_.S || p_hat_plus_.size() != cells * shape_.S ||
      visits_.size() != cells)
    throw ShapeError("reference model tables do not match the shape");
}

ReferenceModel ReferenceModel::from_model(const TabularMDP& mdp,
                                          std::int64_t nominal_visits) {
  const Shape& sh = mdp.shape();
  return ReferenceModel(
      sh, mdp.transitions(), mdp.transitions(),
      std::vector<std::int64_t>(static_cast<std::size_t>(sh.H) * sh.S * sh.A,
                                std::max<std::int64_t>(nominal_visits, 1)));
}

ReferenceModel reference_model(const VisitCounts& counts) {
  const Shape& sh = counts.shape();
  const std::size_t cells = static_cast<std::size_t>(sh.H) * sh.S * sh.A;
  std::vector<double> p_hat(cells * sh.S), p_plus(cells * sh.S);
  std::vector<std::int64_t> visits(cells);
  std::size_t c = 0;
  for (int h = 0; h < sh.H; ++h)
    for (int x = 0; x < sh.S; ++x)
      for (int a = 0; a < sh.A; ++a, ++c) {
        const std::int64_t n = counts.visits(h, x, a);
        visits[c] = n;
        for (int y = 0; y < sh.S; ++y) {
          const std::int64_t k = counts.count(h, x, a, y);
          p_hat[c * sh.S + y] = static_cast<double>(k) / n;
          p_plus[c * sh.S + y] = static_cast<double>(std::max<std::int64_t>(k, 1)) / n;
        }
      }
  return ReferenceModel(sh, std::move(p_hat), std::move(p_plus), std::move(visits));
}

double confidence_width(DivergenceKind kind, std::int64_t N,
                        const WidthParams& p) {
  if (N < 1) throw DomainError("confidence width needs N >= 1");
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  const double S = p.S, A = p.A, H = p.H, T = static_cast<double>(p.T);
  const double n = static_cast<double>(N);
  switch (kind) {
    case DivergenceKind::kTotalVariation:
      return std::sqrt(2.0 * S * std::log(2.0 * S * A * T / p.delta) / n);
    case DivergenceKind::kVarianceWeightedLinf: {
      const double L = std::log(H * S * S * A * T / p.delta);
      return 36.0 * L * L / n;
    }
    case DivergenceKind::kForwardKL:
      return 18.0 * S * std::log(H * S * A * T / p.delta) / n;
    case DivergenceKind::kReverseKL:
      return p.reverse_kl_constant * S * std::log(H * S * A * T / p.delta) / n;
    case DivergenceKind::kChiSquared: {
      const double L = std::log(H * S * S * A * T / p.delta);
      return 11.0 * S * L * L / n;
    }
  }
  return 0.0;
}

std::vector<double> confidence_widths(DivergenceKind kind,
                                      const ReferenceModel& ref,
                                      const WidthParams& params) {
  const Shape& sh = ref.shape();
  std::vector<double> widths;
  widths.reserve(static_cast<std::size_t>(sh.H) * sh.S * sh.A);
  for (int h = 0; h < sh.H; ++h)
    for (int x = 0; x < sh.S; ++x)
      for (int a = 0; a < sh.A; ++a)
        widths.push_back(confidence_width(kind, ref.visits(h, x, a), params));
  return widths;
}

ValuePolicyTable optimistic_backup(Shape sh, std::span<const double> rewards,
                                   const ReferenceModel& ref,
                                   DivergenceKind kind,
                                   std::span<const double> widths,
                                   const BackupOptions& options) {
  if (!(ref.shape() == sh)) throw ShapeError("reference model shape mismatch");
  const std::size_t cells = static_cast<std::size_t>(sh.H) * sh.S * sh.A;
  if (rewards.size() != static_cast<std::size_t>(sh.S * sh.A))
    throw ShapeError("reward table must have S*A entries");
  if (widths.size() != cells) throw ShapeError("width table must have H*S*A entries");
  const bool exact = options.exact_kl && kind == DivergenceKind::kForwardKL;

  StageValues v(sh.H, sh.S);
  std::vector<int> actions(static_cast<std::size_t>(sh.H) * sh.S, 0);
  std::vector<double> bonus(cells, 0.0);
  for (int h = sh.H - 1; h >= 0; --h) {
    const double cap = sh.H - h;
    const auto next = v.stage(h + 1);
    for (int x = 0; x < sh.S; ++x) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < sh.A; ++a) {
        const std::size_t c = (static_cast<std::size_t>(h) * sh.S + x) * sh.A + a;
        ConjugateInput in{next, widths[c], ref.reference_row(kind, h, x, a),
                          cap - 1.0, static_cast<long>(ref.visits(h, x, a)), sh.S};
        double base, cb;
        if (exact) {
          const auto plus = ref.p_hat_plus(h, x, a);
          base = std::inner_product(plus.begin(), plus.end(), next.begin(), 0.0);
          cb = conjugate_kl_linesearch(in);
        } else {
          const auto row = ref.p_hat(h, x, a);
          base = std::inner_product(row.begin(), row.end(), next.begin(), 0.0);
          cb = conjugate_upper(kind, in);
        }
        if (!options.unscaled_unvisited || ref.visited(h, x, a)) cb *= options.bonus_scale;
        bonus[c] = cb;
        const double q = std::min(cap, rewards[x * sh.A + a] + base + cb);
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      if (!(best >= 0.0 && best <= cap)) {
        std::ostringstream msg;
        msg << "optimistic value " << best << " outside [0, " << cap << "]";
        throw InvariantViolation(msg.str());
      }
      v(h, x) = best;
      actions[h * sh.S + x] = best_a;
    }
  }
  return {std::move(v), PolicyTable::deterministic(sh, std::move(actions)),
          std::move(bonus)};
}

TabularAgent::TabularAgent(Shape shape, std::vector<double> rewards,
                           TabularAgentConfig config)
    : shape_(shape),
      rewards_(std::move(rewards)),
      config_(config),
      counts_(shape) {
  if (rewards_.size() != static_cast<std::size_t>(shape.S * shape.A))
    throw ShapeError("reward table must have S*A entries");
  if (config_.episodes < 1) throw ConfigError("agent needs K >= 1");
  if (!(config_.delta > 0.0 && config_.delta < 1.0))
    throw ConfigError("delta must lie in (0,1)");
}

WidthParams TabularAgent::width_params() const {
  return {shape_.S, shape_.A, shape_.H, config_.episodes * shape_.H,
          config_.delta, config_.reverse_kl_constant};
}

const ValuePolicyTable& TabularAgent::plan() {
  ref_ = reference_model(counts_);
  widths_ = confidence_widths(config_.kind, ref_, width_params());
  table_ = optimistic_backup(shape_, rewards_, ref_, config_.kind, widths_,
                             {config_.bonus_scale, config_.exact_kl});
  return table_;
}

void TabularAgent::observe(const Trajectory& trajectory) {
  for (const Transition& t : trajectory) {
    pigeonhole_sum_ += 1.0 / std::sqrt(static_cast<double>(counts_.visits(t.h, t.x, t.a)));
    counts_.record(t.h, t.x, t.a, t.next);
  }
  ++episodes_seen_;
  if (pigeonhole_sum_ > pigeonhole_bound()) {
    std::ostringstream msg;
    msg << "pigeonhole bound violated: " << pigeonhole_sum_ << " > "
        << pigeonhole_bound();
    throw InvariantViolation(msg.str());
  }
}

double TabularAgent::pigeonhole_bound() const {
  const double T = static_cast<double>(episodes_seen_) * shape_.H;
  return 2.0 * std::sqrt(static_cast<double>(shape_.H) * shape_.S * shape_.A * T);
}

TabularAgent make_tabular_agent(DivergenceKind kind, const TabularMDP& mdp,
                                TabularAgentConfig config) {
  config.kind = kind;
  return TabularAgent(mdp.shape(), mdp.rewards(), config);
}

}  // namespace optimist
