#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "s2s/core_model.hpp"

namespace s2s {

// Frequency estimate of an event compared against a theoretical lower bound.
struct McReport {
  std::int64_t trials = 0;
  std::int64_t successes = 0;
  std::int64_t excluded = 0;  // trials removed from the denominator (e.g. non-interpolating)
  double empirical_p = 0.0;
  double ci95_halfwidth = 0.0;
  std::optional<double> theoretical_bound;
  bool vacuous = false;  // bound <= 0 or unavailable
  bool passed = false;   // empirical_p + ci >= bound, or vacuous
};

McReport make_report(std::int64_t successes, std::int64_t trials, std::optional<double> bound,
                     std::int64_t excluded = 0);

// 1 - n (3/4)^m - m(m+3)/2 (1/2)^{min(n+, n-) + 1}; may be negative.
double prop42_bound(int n_plus, int n_minus, int m);

McReport mc_assumption(int n_plus, int n_minus, int m, std::int64_t trials, std::uint64_t seed);

enum class Ordering { Fixed, Algorithmic };

// (0, rho ln 2 / (8 (1 - rho))): the admissible band half-widths.
double max_split_delta(double rho);
double split_k_star(int n, double rho);
// 1 - 3 ln(n) exp(-(4/3) n^{rho/2} delta^2)
double split_bound(int n, double rho, double delta);

struct HalfSplitStep {
  int k = 0;
  double mean_ratio = 0.0;  // mean over trials with |S_U^{k-1}| > 0
  std::int64_t ratio_trials = 0;  // trials contributing to mean_ratio
  double g_frequency = 0.0; // fraction of trials with G_k
  // Binomial(N, 1/2) moment checks pooled over trials: z-scores of the
  // summed deviation X - N/2 and of the summed squared deviation against N/4.
  double mean_z = 0.0;
  double variance_z = 0.0;
  double mean_count = 0.0;  // mean |S_U^k|
};

struct HalfSplitTrace {
  int n = 0;
  int m = 0;
  double delta = 0.0;
  double rho = 0.0;
  double k_star = 0.0;
  int steps = 0;  // floor(k_star), clamped to [1, m]
  Ordering ordering = Ordering::Fixed;
  std::vector<HalfSplitStep> per_step;
  std::vector<std::vector<int>> counts;  // per trial: |S_U^0| .. |S_U^steps|
  McReport all_g;                        // frequency of {for all k <= k_star, G_k}
};

// Positive labels only; masks drawn as Bernoulli(1/2) entries. Throws BadDelta
// when delta lies outside the admissible range.
HalfSplitTrace half_split_stats(int n, int m, std::int64_t trials, double delta, double rho,
                                std::uint64_t seed, Ordering ordering = Ordering::Fixed);

// Per trial: build the limit process (no training) and test
// pred_sq_norm <= bias_bound. Non-interpolating trials are excluded.
McReport mc_bias_bound(int n_plus, int n_minus, int m, const LabelSpec& labels, std::int64_t trials,
                       std::uint64_t seed);

}  // namespace s2s
