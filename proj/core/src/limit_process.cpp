#include "s2s/limit_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "s2s/error.hpp"

namespace s2s {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> sorted_members(const std::vector<char>& flags) {
  std::vector<int> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

AssumptionReport check_assumptions(const MaskMatrix& mask, const Eigen::VectorXd& labels) {
  if (labels.size() != mask.n()) throw Error(ErrorCode::DimensionMismatch, "labels vs mask rows");
  AssumptionReport report;

  report.rows_nonzero = true;
  for (int i = 0; i < mask.n() && report.rows_nonzero; ++i) {
    bool any = false;
    for (int j = 0; j < mask.m() && !any; ++j) any = mask(i, j);
    report.rows_nonzero = any;
  }

  report.cols_nonzero = true;
  std::set<std::vector<int>> seen;
  report.cols_distinct = true;
  for (int j = 0; j < mask.m(); ++j) {
    std::vector<int> col = mask.column(j);
    if (std::none_of(col.begin(), col.end(), [](int v) { return v != 0; })) report.cols_nonzero = false;
    if (!seen.insert(std::move(col)).second) report.cols_distinct = false;
  }

  report.labels_nonzero = (labels.array() != 0.0).all();
  return report;
}

int LimitProcess::stage_at(double t) const {
  // jump_times = t_0 .. t_p, +inf ; stage k covers [t_k, t_{k+1}).
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end() - 1, t);
  const int k = static_cast<int>(it - jump_times.begin()) - 1;
  return std::clamp(k, 0, stage_count());
}

LimitProcess build(const MaskMatrix& mask, const Eigen::VectorXd& labels, const BuildOptions& options) {
  const int n = mask.n();
  const int m = mask.m();
  if (labels.size() != n) throw Error(ErrorCode::DimensionMismatch, "labels vs mask rows");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(labels(i))) throw Error(ErrorCode::InvalidArgument, "non-finite label");
  }

  LimitProcess lp;
  lp.n = n;
  lp.m = m;
  lp.labels = labels;
  lp.signs = mask.neuron_signs();
  lp.assumption_report = check_assumptions(mask, labels);
  if (options.strict && !lp.assumption_report.labels_nonzero) {
    throw Error(ErrorCode::ZeroLabel, "labels must be non-zero in strict mode");
  }

  lp.supports.resize(m);
  for (int j = 0; j < m; ++j) lp.supports[j] = mask.support(j);

  std::vector<char> data_unfitted(n, 1);
  std::vector<char> neuron_unfitted(m, 1);
  std::vector<double> exponent(m, -1.0);
  std::vector<double> d_norm(m, 0.0);
  double t = 0.0;
  bool argmax_unique = true;

  const auto refresh_norms = [&] {
    for (int j = 0; j < m; ++j) {
      if (!neuron_unfitted[j]) continue;  // frozen at the stage it was selected
      double mass = 0.0;
      for (int i : lp.supports[j]) {
        if (data_unfitted[i]) mass += labels(i) * labels(i);
      }
      d_norm[j] = std::sqrt(mass) / n;
    }
  };

  const auto snapshot = [&](int k) {
    StageRecord rec;
    rec.k = k;
    rec.time = t;
    rec.unfitted_data = sorted_members(data_unfitted);
    rec.unfitted_neurons = sorted_members(neuron_unfitted);
    rec.d_norms = d_norm;
    rec.exponents = exponent;
    return rec;
  };

  for (int k = 0;; ++k) {
    refresh_norms();

    // Loop guard: some unfitted neuron still sees unfitted data, i.e. ||D_j|| > 0.
    int best = -1;
    double best_ratio = -kInf;
    for (int j = 0; j < m; ++j) {
      if (!neuron_unfitted[j] || d_norm[j] == 0.0) continue;
      const double ratio = exponent[j] / d_norm[j];
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = j;
      }
    }

    StageRecord rec = snapshot(k);
    lp.jump_times.push_back(t);
    if (best < 0) {
      lp.stages.push_back(std::move(rec));
      break;
    }

    for (int j = 0; j < m; ++j) {
      if (j == best || !neuron_unfitted[j] || d_norm[j] == 0.0) continue;
      const double ratio = exponent[j] / d_norm[j];
      if (std::abs(ratio - best_ratio) <= options.tie_tolerance * std::abs(best_ratio)) {
        if (options.strict) {
          throw Error(ErrorCode::AmbiguousArgmax, "neurons " + std::to_string(best) + " and " +
                                                      std::to_string(j) + " tie at stage " +
                                                      std::to_string(k));
        }
        argmax_unique = false;
      }
    }

    rec.selected = best;
    for (int i : lp.supports[best]) {
      if (data_unfitted[i]) rec.newly_fitted.push_back(i);
    }
    lp.stages.push_back(std::move(rec));

    const double next_t = t - exponent[best] / d_norm[best];
    for (int j = 0; j < m; ++j) {
      exponent[j] = std::min(0.0, exponent[j] + (next_t - t) * d_norm[j]);
    }
    exponent[best] = 0.0;
    neuron_unfitted[best] = 0;
    for (int i : lp.supports[best]) data_unfitted[i] = 0;
    t = next_t;
  }

  lp.jump_times.push_back(kInf);
  lp.assumption_report.argmax_unique = argmax_unique;
  lp.interpolating = lp.stages.back().unfitted_data.empty();
  lp.final_params = theta_at(lp, kInf);
  return lp;
}

Eigen::VectorXd stage_direction(const LimitProcess& lp, int k, int j) {
  if (k < 0 || k > lp.stage_count()) throw Error(ErrorCode::InvalidArgument, "stage out of range");
  // A neuron selected at stage q < k keeps D_j^(q).
  int stage = k;
  for (int q = 0; q < k; ++q) {
    if (lp.stages[q].selected == j) {
      stage = q;
      break;
    }
  }
  const auto& unfitted = lp.stages[stage].unfitted_data;
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(lp.n);
  for (int i : lp.supports[j]) {
    if (std::binary_search(unfitted.begin(), unfitted.end(), i)) coef(i) = lp.labels(i) / lp.n;
  }
  return coef;
}

DenseNetwork theta_at(const LimitProcess& lp, double t) {
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "t must be non-negative");
  DenseNetwork net = DenseNetwork::zeros(lp.m, lp.n);
  const int k = lp.stage_at(t);
  for (int q = 0; q < k; ++q) {
    const int j = *lp.stages[q].selected;
    const double s = lp.signs[j];
    Eigen::VectorXd nd = Eigen::VectorXd::Zero(lp.n);
    for (int i : lp.stages[q].newly_fitted) nd(i) = lp.labels(i);
    const double root = std::sqrt(nd.norm());
    net.a(j) = s * root;
    net.W.row(j) = (s / root) * nd.transpose();
  }
  return net;
}

double exponent_at(const LimitProcess& lp, int j, double t) {
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "t must be non-negative");
  if (j < 0 || j >= lp.m) throw Error(ErrorCode::InvalidArgument, "neuron out of range");
  const int k = lp.stage_at(t);
  const StageRecord& rec = lp.stages[k];
  return std::min(0.0, rec.exponents[j] + (t - rec.time) * rec.d_norms[j]);
}

DenseNetwork to_ambient(const DenseNetwork& data_coordinates, const OrthonormalDataset& data) {
  if (data_coordinates.d() != data.n()) {
    throw Error(ErrorCode::DimensionMismatch, "network is not in data coordinates");
  }
  DenseNetwork out;
  out.a = data_coordinates.a;
  if (data.is_identity()) {
    out.W = data_coordinates.W;
  } else {
    out.W = data_coordinates.W * data.input_matrix();
  }
  return out;
}

double pred_sq_norm(const LimitProcess& lp) {
  const auto& norms = lp.stages.back().d_norms;
  double total = 0.0;
  for (int j = 0; j < lp.m; ++j) {
    // Neurons never selected carry zero D at the terminal stage (loop guard).
    const bool fitted = !std::binary_search(lp.stages.back().unfitted_neurons.begin(),
                                            lp.stages.back().unfitted_neurons.end(), j);
    if (fitted) total += lp.n * norms[j];
  }
  return total;
}

double telescoped_sq_norm(const LimitProcess& lp) {
  double total = 0.0;
  for (int k = 0; k < lp.stage_count(); ++k) {
    double mass = 0.0;
    for (int i : lp.stages[k].newly_fitted) mass += lp.labels(i) * lp.labels(i);
    total += std::sqrt(mass);
  }
  return total;
}

double opt_sq_norm(const Eigen::VectorXd& labels) {
  double pos = 0.0;
  double neg = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) > 0.0) pos += labels(i) * labels(i);
    if (labels(i) < 0.0) neg += labels(i) * labels(i);
  }
  return std::sqrt(pos) + std::sqrt(neg);
}

double bias_bound(const Eigen::VectorXd& labels) {
  int n_plus = 0;
  int n_minus = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) > 0.0) ++n_plus;
    if (labels(i) < 0.0) ++n_minus;
  }
  const double y_max = labels.size() == 0 ? 0.0 : labels.cwiseAbs().maxCoeff();
  return 5.0 * (std::sqrt(double(n_plus)) + std::sqrt(double(n_minus))) * y_max;
}

}  // namespace s2s
