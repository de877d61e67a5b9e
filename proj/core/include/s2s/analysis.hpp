#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "s2s/core_model.hpp"
#include "s2s/limit_process.hpp"
#include "s2s/trainer.hpp"

namespace s2s {

struct JumpCluster {
  std::int64_t epoch = 0;  // earliest fit event in the cluster
  std::vector<int> data;   // sorted datum indices fitted in the cluster
};

// Groups fit events whose epochs lie within `window` (relative) of the
// cluster's first event. Throws ClusterMismatch when expected_count is given
// and differs from the number of clusters found.
std::vector<JumpCluster> detect_jumps(std::span<const std::optional<std::int64_t>> fit_epochs,
                                      std::optional<int> expected_count, double window = 0.01);
std::vector<JumpCluster> detect_jumps(const Trajectory& traj, std::optional<int> expected_count,
                                      double window = 0.01);

struct JumpStage {
  int k = 0;  // jump index, 1-based (t_k)
  double predicted = 0.0;
  double observed = 0.0;
  double relative_error = 0.0;
  bool sets_match = false;
};

struct JumpComparison {
  std::vector<JumpStage> stages;
  double max_relative_error = 0.0;
  bool all_sets_match = true;
};

JumpComparison compare_jumps(const Trajectory& traj, const LimitProcess& lp, double lr, double alpha_log,
                             double window = 0.01);

struct SlopeEntry {
  int neuron = 0;
  int stage = 0;
  bool fitted = false;  // neuron was selected before this stage
  int samples = 0;
  bool skipped = false;  // fewer than the minimum window samples
  double fitted_slope = 0.0;     // d ln||w_j|| / d epoch, OLS
  double predicted_slope = 0.0;  // lr ||D_j^(k)||, zero for fitted neurons
  std::optional<double> relative_error;  // only when predicted_slope > 0
};

struct SlopeReport {
  std::vector<SlopeEntry> entries;
  double max_relative_error = 0.0;
};

struct SlopeOptions {
  double margin = 0.2;  // excluded fraction at each end of an inter-jump window
  int min_samples = 10;
};

// Throws TooFewSamples if no window holds min_samples samples.
SlopeReport segment_slopes(const Trajectory& traj, const LimitProcess& lp, double lr, double alpha_log,
                           const SlopeOptions& options = {});

// s_j cos(w_j, D_j^(k)) per neuron; empty where either vector is zero.
std::vector<std::optional<double>> alignment(std::span<const ScaledNeuron> state, const LimitProcess& lp,
                                             int k, const OrthonormalDataset& data);
std::vector<std::optional<double>> alignment(const DenseNetwork& net, const LimitProcess& lp, int k,
                                             const OrthonormalDataset& data);

double network_sq_norm(const DenseNetwork& net);
double network_sq_norm(std::span<const ScaledNeuron> state);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares of y on x. Throws DegenerateFit on < 2 points or constant x.
LinearFit ols(std::span<const double> x, std::span<const double> y);

struct ScalingPoint {
  double n = 0.0;
  double value = 0.0;
};

// OLS on (ln n, ln value); needs >= 3 points with positive coordinates.
LinearFit loglog_slope(std::span<const ScalingPoint> points);

}  // namespace s2s
