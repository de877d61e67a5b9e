#include "s2s/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "s2s/error.hpp"

namespace s2s {

std::vector<JumpCluster> detect_jumps(std::span<const std::optional<std::int64_t>> fit_epochs,
                                      std::optional<int> expected_count, double window) {
  std::vector<std::pair<std::int64_t, int>> events;
  for (std::size_t i = 0; i < fit_epochs.size(); ++i) {
    if (fit_epochs[i]) events.emplace_back(*fit_epochs[i], static_cast<int>(i));
  }
  std::sort(events.begin(), events.end());

  std::vector<JumpCluster> clusters;
  for (const auto& [epoch, datum] : events) {
    if (clusters.empty() || double(epoch) > double(clusters.back().epoch) * (1.0 + window)) {
      clusters.push_back({epoch, {}});
    }
    clusters.back().data.push_back(datum);
  }
  for (auto& cluster : clusters) std::sort(cluster.data.begin(), cluster.data.end());

  if (expected_count && static_cast<int>(clusters.size()) != *expected_count) {
    throw Error(ErrorCode::ClusterMismatch, "found " + std::to_string(clusters.size()) +
                                                " jump clusters, expected " + std::to_string(*expected_count));
  }
  return clusters;
}

std::vector<JumpCluster> detect_jumps(const Trajectory& traj, std::optional<int> expected_count,
                                      double window) {
  return detect_jumps(std::span<const std::optional<std::int64_t>>(traj.fit_epochs), expected_count, window);
}

JumpComparison compare_jumps(const Trajectory& traj, const LimitProcess& lp, double lr, double alpha_log,
                             double window) {
  const int p = lp.stage_count();
  const auto clusters = detect_jumps(traj, p, window);
  JumpComparison out;
  for (int k = 1; k <= p; ++k) {
    JumpStage stage;
    stage.k = k;
    stage.predicted = lp.jump_times[k];
    stage.observed = accelerated_time(double(clusters[k - 1].epoch), lr, alpha_log);
    stage.relative_error = std::abs(stage.observed - stage.predicted) / stage.predicted;
    stage.sets_match = clusters[k - 1].data == lp.stages[k - 1].newly_fitted;
    out.max_relative_error = std::max(out.max_relative_error, stage.relative_error);
    out.all_sets_match = out.all_sets_match && stage.sets_match;
    out.stages.push_back(stage);
  }
  return out;
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::DegenerateFit, "need >= 2 paired points");
  const double count = double(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateFit, "abscissae are constant");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

LinearFit loglog_slope(std::span<const ScalingPoint> points) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateFit, "need >= 3 points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& p : points) {
    if (!(p.n > 0.0) || !(p.value > 0.0)) throw Error(ErrorCode::DegenerateFit, "non-positive coordinate");
    lx.push_back(std::log(p.n));
    ly.push_back(std::log(p.value));
  }
  return ols(lx, ly);
}

SlopeReport segment_slopes(const Trajectory& traj, const LimitProcess& lp, double lr, double alpha_log,
                           const SlopeOptions& options) {
  SlopeReport report;
  bool any_window = false;
  const int p = lp.stage_count();
  for (int k = 0; k < p; ++k) {
    const double start = epoch_at(lp.jump_times[k], lr, alpha_log);
    const double end = epoch_at(lp.jump_times[k + 1], lr, alpha_log);
    const double lo = start + options.margin * (end - start);
    const double hi = end - options.margin * (end - start);

    std::vector<const TrajectorySample*> window;
    for (const auto& s : traj.samples) {
      if (double(s.epoch) >= lo && double(s.epoch) <= hi) window.push_back(&s);
    }
    const bool enough = static_cast<int>(window.size()) >= options.min_samples;
    any_window = any_window || enough;

    const auto& unfitted = lp.stages[k].unfitted_neurons;
    for (int j = 0; j < lp.m; ++j) {
      SlopeEntry entry;
      entry.neuron = j;
      entry.stage = k;
      entry.fitted = !std::binary_search(unfitted.begin(), unfitted.end(), j);
      entry.samples = static_cast<int>(window.size());
      entry.skipped = !enough;
      entry.predicted_slope = entry.fitted ? 0.0 : lr * lp.stages[k].d_norms[j];
      if (enough) {
        std::vector<double> x;
        std::vector<double> y;
        for (const auto* s : window) {
          x.push_back(double(s->epoch));
          y.push_back(s->log_w_norm[j]);
        }
        entry.fitted_slope = ols(x, y).slope;
        if (entry.predicted_slope > 0.0) {
          entry.relative_error = std::abs(entry.fitted_slope - entry.predicted_slope) / entry.predicted_slope;
          report.max_relative_error = std::max(report.max_relative_error, *entry.relative_error);
        }
      }
      report.entries.push_back(entry);
    }
  }
  if (p > 0 && !any_window) {
    throw Error(ErrorCode::TooFewSamples,
                "no inter-jump window holds " + std::to_string(options.min_samples) + " samples");
  }
  return report;
}

namespace {

std::vector<std::optional<double>> alignment_impl(const std::vector<Eigen::VectorXd>& directions,
                                                  const LimitProcess& lp, int k,
                                                  const OrthonormalDataset& data) {
  if (static_cast<int>(directions.size()) != lp.m) throw Error(ErrorCode::DimensionMismatch, "neuron count");
  std::vector<std::optional<double>> out(lp.m);
  for (int j = 0; j < lp.m; ++j) {
    const Eigen::VectorXd d = data.lift(stage_direction(lp, k, j));
    const double dn = d.norm();
    const double wn = directions[j].norm();
    if (dn == 0.0 || wn == 0.0) continue;
    out[j] = std::clamp(lp.signs[j] * directions[j].dot(d) / (dn * wn), -1.0, 1.0);
  }
  return out;
}

}  // namespace

std::vector<std::optional<double>> alignment(std::span<const ScaledNeuron> state, const LimitProcess& lp,
                                             int k, const OrthonormalDataset& data) {
  std::vector<Eigen::VectorXd> dirs;
  for (const auto& neuron : state) dirs.push_back(neuron.v);
  return alignment_impl(dirs, lp, k, data);
}

std::vector<std::optional<double>> alignment(const DenseNetwork& net, const LimitProcess& lp, int k,
                                             const OrthonormalDataset& data) {
  std::vector<Eigen::VectorXd> dirs;
  for (int j = 0; j < net.m(); ++j) dirs.push_back(net.W.row(j).transpose());
  return alignment_impl(dirs, lp, k, data);
}

double network_sq_norm(const DenseNetwork& net) {
  return 0.5 * (net.a.squaredNorm() + net.W.squaredNorm());
}

double network_sq_norm(std::span<const ScaledNeuron> state) {
  double total = 0.0;
  for (const auto& neuron : state) {
    total += 0.5 * std::exp(2.0 * neuron.c) * (neuron.b * neuron.b + neuron.v.squaredNorm());
  }
  return total;
}

}  // namespace s2s
