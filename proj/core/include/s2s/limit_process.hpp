#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "s2s/core_model.hpp"

namespace s2s {

struct AssumptionReport {
  bool rows_nonzero = false;
  bool cols_nonzero = false;
  bool cols_distinct = false;
  bool labels_nonzero = false;
  // Unknown until the limit process has been built.
  std::optional<bool> argmax_unique;

  // Rows, columns and distinctness: the mask-only part of the assumption.
  bool mask_conditions() const noexcept { return rows_nonzero && cols_nonzero && cols_distinct; }
  // All five flags; a pending argmax flag counts as not passed.
  bool passed() const noexcept {
    return mask_conditions() && labels_nonzero && argmax_unique.value_or(false);
  }
};

AssumptionReport check_assumptions(const MaskMatrix& mask, const Eigen::VectorXd& labels);

// One saddle of the limit process, valid on [time, next jump).
struct StageRecord {
  int k = 0;
  double time = 0.0;
  std::vector<int> unfitted_data;     // S_U^(k), sorted
  std::vector<int> unfitted_neurons;  // N_U^(k), sorted
  std::vector<double> d_norms;        // ||D_j^(k)|| for every neuron
  std::vector<double> exponents;      // l_j(t_k), in [-1, 0]
  std::optional<int> selected;        // j_star; empty at the terminal stage
  std::vector<int> newly_fitted;      // S_U^(k) intersect S_{j_star}
};

struct LimitProcess {
  int n = 0;
  int m = 0;
  Eigen::VectorXd labels;
  std::vector<int> signs;
  std::vector<std::vector<int>> supports;  // S_j
  std::vector<StageRecord> stages;         // p + 1 records, terminal last
  std::vector<double> jump_times;          // t_0 .. t_p, then +inf
  DenseNetwork final_params;               // in data coordinates (d = n)
  AssumptionReport assumption_report;
  bool interpolating = false;

  int stage_count() const noexcept { return static_cast<int>(stages.size()) - 1; }
  // k such that t lies in [t_k, t_{k+1}).
  int stage_at(double t) const;
};

struct BuildOptions {
  bool strict = false;
  double tie_tolerance = 1e-12;  // relative, on l_j / ||D_j||
};

LimitProcess build(const MaskMatrix& mask, const Eigen::VectorXd& labels,
                   const BuildOptions& options = {});

// D_j^(k) expressed in the data basis: coefficient i multiplies x_i.
Eigen::VectorXd stage_direction(const LimitProcess& lp, int k, int j);

// Network at accelerated time t, in data coordinates.
DenseNetwork theta_at(const LimitProcess& lp, double t);
double exponent_at(const LimitProcess& lp, int j, double t);

// Re-expresses a data-coordinate network in the ambient coordinates of `data`.
DenseNetwork to_ambient(const DenseNetwork& data_coordinates, const OrthonormalDataset& data);

double pred_sq_norm(const LimitProcess& lp);
// Sum over jumps of the label mass fitted at that jump.
double telescoped_sq_norm(const LimitProcess& lp);
double opt_sq_norm(const Eigen::VectorXd& labels);
double bias_bound(const Eigen::VectorXd& labels);

}  // namespace s2s
