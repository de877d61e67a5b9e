#include "s2s/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "s2s/error.hpp"
#include "s2s/limit_process.hpp"
#include "s2s/random.hpp"

namespace s2s {

McReport make_report(std::int64_t successes, std::int64_t trials, std::optional<double> bound,
                     std::int64_t excluded) {
  McReport r;
  r.trials = trials;
  r.successes = successes;
  r.excluded = excluded;
  const std::int64_t counted = trials - excluded;
  if (counted > 0) {
    r.empirical_p = double(successes) / double(counted);
    r.ci95_halfwidth = 1.96 * std::sqrt(r.empirical_p * (1.0 - r.empirical_p) / double(counted));
  }
  r.theoretical_bound = bound;
  r.vacuous = !bound || *bound <= 0.0;
  r.passed = r.vacuous || r.empirical_p + r.ci95_halfwidth >= *bound;
  return r;
}

double prop42_bound(int n_plus, int n_minus, int m) {
  const double n = n_plus + n_minus;
  const double mm = m;
  return 1.0 - n * std::pow(0.75, mm) -
         mm * (mm + 3.0) / 2.0 * std::pow(0.5, double(std::min(n_plus, n_minus) + 1));
}

McReport mc_assumption(int n_plus, int n_minus, int m, std::int64_t trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (n_plus < 0 || n_minus < 0 || n_plus + n_minus < 1 || m < 1) {
    throw Error(ErrorCode::InvalidArgument, "need n+ + n- >= 1 and m >= 1");
  }
  const int n = n_plus + n_minus;
  Eigen::VectorXd labels(n);
  for (int i = 0; i < n; ++i) labels(i) = i < n_plus ? 1.0 : -1.0;
  const OrthonormalDataset data = OrthonormalDataset::identity(labels);

  std::vector<char> ok(static_cast<std::size_t>(trials), 0);
  parallel_for(ok.size(), [&](std::size_t t) {
    const InitDraw init = sample_init(m, n, 0.0, derive_seed(seed, t));
    ok[t] = check_assumptions(mask_matrix(data, init), labels).mask_conditions() ? 1 : 0;
  });
  const auto successes = std::count(ok.begin(), ok.end(), 1);
  return make_report(successes, trials, prop42_bound(n_plus, n_minus, m));
}

double max_split_delta(double rho) { return rho * std::log(2.0) / (8.0 * (1.0 - rho)); }

double split_k_star(int n, double rho) { return (1.0 - rho) * std::log(double(n)) / std::log(2.0); }

double split_bound(int n, double rho, double delta) {
  return 1.0 - 3.0 * std::log(double(n)) *
                   std::exp(-(4.0 / 3.0) * std::pow(double(n), rho / 2.0) * delta * delta);
}

namespace {

// |S_U^k| for k = 0..steps under a fixed neuron order with Bernoulli(1/2) masks.
std::vector<int> fixed_order_counts(int n, int steps, Rng& rng) {
  std::vector<int> counts{n};
  std::bernoulli_distribution active(0.5);
  int remaining = n;
  for (int k = 1; k <= steps; ++k) {
    int next = 0;
    for (int i = 0; i < remaining; ++i) next += active(rng) ? 0 : 1;
    remaining = next;
    counts.push_back(remaining);
  }
  return counts;
}

std::vector<int> algorithmic_counts(int n, int m, int steps, Rng& rng) {
  std::bernoulli_distribution active(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::uint8_t> entries(static_cast<std::size_t>(n) * m);
  for (auto& e : entries) e = active(rng) ? 1 : 0;
  Eigen::VectorXd labels(n);
  for (int i = 0; i < n; ++i) {
    double y = 0.0;
    while (y == 0.0) y = std::abs(normal(rng));
    labels(i) = y;
  }
  const MaskMatrix mask(n, m, std::move(entries), std::vector<int>(m, 1), std::vector<int>(n, 1));
  const LimitProcess lp = build(mask, labels);
  std::vector<int> counts;
  for (int k = 0; k <= steps; ++k) {
    const int stage = std::min(k, lp.stage_count());
    counts.push_back(static_cast<int>(lp.stages[stage].unfitted_data.size()));
  }
  return counts;
}

}  // namespace

HalfSplitTrace half_split_stats(int n, int m, std::int64_t trials, double delta, double rho,
                                std::uint64_t seed, Ordering ordering) {
  if (!(rho > 0.0 && rho < 0.5)) throw Error(ErrorCode::InvalidArgument, "rho must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta < max_split_delta(rho))) {
    throw Error(ErrorCode::BadDelta, "delta must lie in (0, " + std::to_string(max_split_delta(rho)) + ")");
  }
  if (n < 2 || m < 1 || trials < 1) throw Error(ErrorCode::InvalidArgument, "need n >= 2, m >= 1, trials >= 1");

  HalfSplitTrace trace;
  trace.n = n;
  trace.m = m;
  trace.delta = delta;
  trace.rho = rho;
  trace.ordering = ordering;
  trace.k_star = split_k_star(n, rho);
  // k_star is often an integer in exact arithmetic (n a power of two); absorb the rounding.
  // At least one step so that tiny n still exercises the recursion.
  trace.steps = std::clamp(static_cast<int>(std::floor(trace.k_star + 1e-9)), 1, m);
  trace.counts.resize(static_cast<std::size_t>(trials));

  parallel_for(trace.counts.size(), [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    trace.counts[t] = ordering == Ordering::Fixed ? fixed_order_counts(n, trace.steps, rng)
                                                  : algorithmic_counts(n, m, trace.steps, rng);
  });

  std::int64_t all_g = 0;
  std::vector<char> trial_ok(trace.counts.size(), 1);
  for (int k = 1; k <= trace.steps; ++k) {
    HalfSplitStep step;
    step.k = k;
    double ratio_sum = 0.0;
    double dev_sum = 0.0;
    double var_sum = 0.0;
    double sq_dev_sum = 0.0;
    double sq_var_sum = 0.0;
    double count_sum = 0.0;
    std::int64_t g_count = 0;
    for (std::size_t t = 0; t < trace.counts.size(); ++t) {
      const double prev = trace.counts[t][k - 1];
      const double cur = trace.counts[t][k];
      count_sum += cur;
      if (prev > 0) {
        ratio_sum += cur / prev;
        ++step.ratio_trials;
      }
      const double dev = cur - 0.5 * prev;
      dev_sum += dev;
      var_sum += prev / 4.0;
      sq_dev_sum += dev * dev - prev / 4.0;
      sq_var_sum += prev * (prev - 1.0) / 8.0;
      const bool g = std::abs(dev) <= delta * prev;
      g_count += g ? 1 : 0;
      if (!g) trial_ok[t] = 0;
    }
    step.mean_ratio = step.ratio_trials > 0 ? ratio_sum / double(step.ratio_trials) : 0.0;
    step.g_frequency = double(g_count) / double(trials);
    step.mean_z = var_sum > 0.0 ? dev_sum / std::sqrt(var_sum) : 0.0;
    step.variance_z = sq_var_sum > 0.0 ? sq_dev_sum / std::sqrt(sq_var_sum) : 0.0;
    step.mean_count = count_sum / double(trials);
    trace.per_step.push_back(step);
  }
  all_g = std::count(trial_ok.begin(), trial_ok.end(), 1);
  trace.all_g = make_report(all_g, trials, split_bound(n, rho, delta));
  return trace;
}

McReport mc_bias_bound(int n_plus, int n_minus, int m, const LabelSpec& labels, std::int64_t trials,
                       std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (n_plus < 0 || n_minus < 0 || n_plus + n_minus < 1 || m < 1) {
    throw Error(ErrorCode::InvalidArgument, "need n+ + n- >= 1 and m >= 1");
  }
  const int n = n_plus + n_minus;
  if (labels.kind == LabelKind::Explicit && static_cast<int>(labels.values.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "explicit labels must have n+ + n- entries");
  }

  // 0 = failure, 1 = success, 2 = excluded
  std::vector<char> outcome(static_cast<std::size_t>(trials), 0);
  parallel_for(outcome.size(), [&](std::size_t t) {
    Rng rng = make_rng(seed, 2 * t + 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      const double sign = i < n_plus ? 1.0 : -1.0;
      switch (labels.kind) {
        case LabelKind::Explicit: y(i) = labels.values[i]; break;
        case LabelKind::Constant: y(i) = sign * std::abs(labels.constant); break;
        case LabelKind::AbsGaussian:
        case LabelKind::Gaussian: y(i) = sign * std::abs(normal(rng)); break;
      }
    }
    const OrthonormalDataset data = OrthonormalDataset::identity(y);
    const InitDraw init = sample_init(m, n, 0.0, derive_seed(seed, 2 * t));
    const LimitProcess lp = build(mask_matrix(data, init), y);
    if (!lp.interpolating) {
      outcome[t] = 2;
      return;
    }
    outcome[t] = pred_sq_norm(lp) <= bias_bound(y) ? 1 : 0;
  });
  const auto successes = std::count(outcome.begin(), outcome.end(), 1);
  const auto excluded = std::count(outcome.begin(), outcome.end(), 2);
  return make_report(successes, trials, std::nullopt, excluded);
}

}  // namespace s2s
