#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "optimist/divergence.hpp"
#include "optimist/mdp.hpp"

// Optimistic dynamic programming for tabular episodic MDPs: visit counts,
// empirical reference models, confidence widths and the clipped optimistic
// Bellman recursion
//   V†_h(x) = max_a min{H - h, r(x,a) + <P̂_h(.|x,a), V†_{h+1}> + CB†_h(x,a)}
// (0-based h), with CB† the inflated conjugate of the selected divergence.

namespace optimist {

class VisitCounts {
 public:
  VisitCounts() = default;
  explicit VisitCounts(Shape shape);

  const Shape& shape() const { return shape_; }

  void record(int h, int x, int a, int next);
  void record(const Trajectory& trajectory);

  std::int64_t count(int h, int x, int a, int next) const {
    return n3_[cell(h, x, a) * shape_.S + next];
  }
  // Raw number of observed transitions from (h, x, a).
  std::int64_t raw_visits(int h, int x, int a) const { return n2_[cell(h, x, a)]; }
  // N_h(x, a) = max(raw visits, 1).
  std::int64_t visits(int h, int x, int a) const {
    return std::max<std::int64_t>(n2_[cell(h, x, a)], 1);
  }

 private:
  std::size_t cell(int h, int x, int a) const {
    return (static_cast<std::size_t>(h) * shape_.S + x) * shape_.A + a;
  }

  Shape shape_;
  std::vector<std::int64_t> n3_;
  std::vector<std::int64_t> n2_;
};

// Returns counts with the trajectory added.
VisitCounts update_counts(VisitCounts counts, const Trajectory& trajectory);

// P̂ = n3 / N and the smoothed P̂⁺ = max(1, n3) / N.
class ReferenceModel {
 public:
  ReferenceModel() = default;
  ReferenceModel(Shape shape, std::vector<double> p_hat,
                 std::vector<double> p_hat_plus,
                 std::vector<std::int64_t> visits);

  // Reference centred on a known model: P̂ = P̂⁺ = P with a nominal count.
  static ReferenceModel from_model(const TabularMDP& mdp,
                                   std::int64_t nominal_visits = 1);

  const Shape& shape() const { return shape_; }
  std::span<const double> p_hat(int h, int x, int a) const {
    return {p_hat_.data() + cell(h, x, a) * shape_.S,
            static_cast<std::size_t>(shape_.S)};
  }
  std::span<const double> p_hat_plus(int h, int x, int a) const {
    return {p_hat_plus_.data() + cell(h, x, a) * shape_.S,
            static_cast<std::size_t>(shape_.S)};
  }
  // The row the given divergence is centred on.
  std::span<const double> reference_row(DivergenceKind kind, int h, int x,
                                        int a) const {
    return uses_smoothed_reference(kind) ? p_hat_plus(h, x, a) : p_hat(h, x, a);
  }
  std::int64_t visits(int h, int x, int a) const { return visits_[cell(h, x, a)]; }
  // False while P̂(h, x, a, .) is still the zero vector.
  bool visited(int h, int x, int a) const {
    for (double v : p_hat(h, x, a))
      if (v > 0.0) return true;
    return false;
  }

 private:
  std::size_t cell(int h, int x, int a) const {
    return (static_cast<std::size_t>(h) * shape_.S + x) * shape_.A + a;
  }

  Shape shape_;
  std::vector<double> p_hat_;
  std::vector<double> p_hat_plus_;
  std::vector<std::int64_t> visits_;
};

ReferenceModel reference_model(const VisitCounts& counts);

struct WidthParams {
  int S = 1;
  int A = 1;
  int H = 1;
  std::int64_t T = 1;  // total rounds K * H
  double delta = 0.05;
  double reverse_kl_constant = 18.0;
};

// Confidence width eps for N visits; strictly decreasing in N.
double confidence_width(DivergenceKind kind, std::int64_t N,
                        const WidthParams& params);

// Width table indexed like ReferenceModel cells.
std::vector<double> confidence_widths(DivergenceKind kind,
                                      const ReferenceModel& ref,
                                      const WidthParams& params);

struct ValuePolicyTable {
  StageValues values;
  PolicyTable policy;
  std::vector<double> bonus;  // CB† actually used, indexed (h, x, a)

  double bonus_at(int h, int x, int a) const {
    const Shape& sh = policy.shape();
    return bonus[(static_cast<std::size_t>(h) * sh.S + x) * sh.A + a];
  }
};

struct BackupOptions {
  double bonus_scale = 1.0;
  // Forward KL only: use the exact line-search conjugate around P̂⁺ instead
  // of the closed-form bound around P̂.
  bool exact_kl = false;
  // Rows never visited keep the full bonus regardless of bonus_scale.
  bool unscaled_unvisited = true;
};

ValuePolicyTable optimistic_backup(Shape shape, std::span<const double> rewards,
                                   const ReferenceModel& ref,
                                   DivergenceKind kind,
                                   std::span<const double> widths,
                                   const BackupOptions& options = {});

struct TabularAgentConfig {
  DivergenceKind kind = DivergenceKind::kTotalVariation;
  double delta = 0.05;
  std::int64_t episodes = 1;  // K, enters the widths through T = K H
  double bonus_scale = 1.0;
  double reverse_kl_constant = 18.0;
  bool exact_kl = false;
};

// Optimistic tabular learner. The plan is a pure function of the recorded
// transitions and the configuration.
class TabularAgent {
 public:
  TabularAgent(Shape shape, std::vector<double> rewards,
               TabularAgentConfig config);

  const ValuePolicyTable& plan();
  void observe(const Trajectory& trajectory);

  const TabularAgentConfig& config() const { return config_; }
  const VisitCounts& counts() const { return counts_; }
  const ReferenceModel& reference() const { return ref_; }
  const std::vector<double>& widths() const { return widths_; }
  WidthParams width_params() const;

  // Running sum of 1/sqrt(N) at visited pairs, checked against 2 sqrt(HSAT)
  // after every episode.
  double pigeonhole_sum() const { return pigeonhole_sum_; }
  double pigeonhole_bound() const;
  std::int64_t episodes_seen() const { return episodes_seen_; }

 private:
  Shape shape_;
  std::vector<double> rewards_;
  TabularAgentConfig config_;
  VisitCounts counts_;
  ReferenceModel ref_;
  std::vector<double> widths_;
  ValuePolicyTable table_;
  double pigeonhole_sum_ = 0.0;
  std::int64_t episodes_seen_ = 0;
};

TabularAgent make_tabular_agent(DivergenceKind kind, const TabularMDP& mdp,
                                TabularAgentConfig config);

}  // namespace optimist
