#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "s2s/core_model.hpp"

namespace s2s {

// One neuron in log-domain form: w = e^c v, a = s e^c b, with b > 0.
struct ScaledNeuron {
  Eigen::VectorXd v;
  double b = 1.0;
  double c = 0.0;
  int s = 1;

  double log_w_norm() const { return c + std::log(v.norm()); }
  double log_a_abs() const { return c + std::log(b); }
  // Materialized parameters; may underflow to zero.
  Eigen::VectorXd w() const { return std::exp(c) * v; }
  double a() const { return s * std::exp(c) * b; }
};

struct RenormBand {
  double low = 0.5;
  double high = 2.0;

  bool contains(const ScaledNeuron& neuron) const;
};

// c += ln r, v /= r, b /= r with r = sqrt(||v|| b). Throws CollapsedNeuron if
// either mantissa has underflowed to zero.
ScaledNeuron renormalize(ScaledNeuron neuron);

std::vector<ScaledNeuron> scaled_from_init(const InitDraw& init);
DenseNetwork materialize(std::span<const ScaledNeuron> state);

struct TrainerConfig {
  double lr = 0.01;
  std::int64_t max_epochs = 10'000'000;
  double loss_stop = 1e-20;
  std::int64_t record_every = 1000;
  double fit_threshold = 0.5;
  RenormBand band;
  bool record_residuals = true;
  std::vector<std::int64_t> snapshot_epochs;  // full-state captures, sorted

  void validate() const;
};

// Output of a single evaluation of the network on the training set.
struct StepInfo {
  double loss = 0.0;
  Eigen::VectorXd outputs;
  Eigen::VectorXd residuals;
};

// Full-batch gradient descent on the log-domain parameters. Updates are
// algebraically identical to plain GD on (w, a): the shared factor e^c cancels.
class ScaledGradientDescent {
 public:
  ScaledGradientDescent(const OrthonormalDataset& data, double lr, RenormBand band = {});

  // Outputs, residuals and loss at the current state. Contributions whose
  // log-magnitude falls below ln(DBL_MIN) are exactly zero.
  const StepInfo& evaluate(std::span<const ScaledNeuron> state);
  // Applies one GD update using the most recent evaluate() of the same state.
  void apply(std::span<ScaledNeuron> state);
  // evaluate() followed by apply(); returns the pre-update evaluation.
  StepInfo step(std::span<ScaledNeuron> state);
  // ||fD_j|| at the last evaluated state.
  std::vector<double> dynamical_norms() const;

 private:
  const OrthonormalDataset& data_;
  double lr_;
  RenormBand band_;
  StepInfo info_;
  std::vector<Eigen::VectorXd> preact_;  // X v_j per neuron
};

void gd_step(std::vector<ScaledNeuron>& state, const OrthonormalDataset& data, double lr);

// Plain-float full-batch gradient descent; used for moderate initialization
// scales, unbalanced (He) initialization and as a reference implementation.
class DenseGradientDescent {
 public:
  DenseGradientDescent(const OrthonormalDataset& data, double lr);

  const StepInfo& evaluate(const DenseNetwork& net);
  void apply(DenseNetwork& net);
  std::vector<double> dynamical_norms() const;

 private:
  const OrthonormalDataset& data_;
  double lr_;
  StepInfo info_;
  Eigen::MatrixXd preact_;  // n x m
};

struct TrajectorySample {
  std::int64_t epoch = 0;
  double t = 0.0;  // accelerated time; NaN without a log-scale
  double loss = 0.0;
  std::vector<double> log_w_norm;
  std::vector<double> log_a_abs;
  std::vector<double> dynamical_norm;  // ||fD_j||
  Eigen::VectorXd residuals;           // empty unless recorded
};

struct Snapshot {
  std::int64_t epoch = 0;
  std::vector<ScaledNeuron> state;
};

enum class Outcome { Converged, Budget };

struct Trajectory {
  double lr = 0.0;
  std::optional<double> alpha_log;
  double fit_threshold = 0.5;
  Eigen::VectorXd labels;
  std::vector<TrajectorySample> samples;
  std::vector<std::optional<std::int64_t>> fit_epochs;  // exact, at fit_threshold
  std::vector<Snapshot> snapshots;
  std::vector<ScaledNeuron> final_state;  // log-domain runs only
  DenseNetwork final_network;             // materialized final parameters
  Outcome outcome = Outcome::Budget;
  std::int64_t epochs_run = 0;
  double final_loss = 0.0;
  double max_step_loss_increase = 0.0;  // max over steps of (L_{e+1} - L_e) / L_e
};

// Log-domain training from a balanced draw.
Trajectory train(const OrthonormalDataset& data, const InitDraw& init, const TrainerConfig& config);
// Plain-float training; alpha_log, when given, enables accelerated time.
Trajectory train_dense(const OrthonormalDataset& data, DenseNetwork init, const TrainerConfig& config,
                       std::optional<double> alpha_log = std::nullopt);

// t = epoch * lr / log(1/alpha). Throws BadScale if alpha_log >= 0.
double accelerated_time(double epoch, double lr, double alpha_log);
double epoch_at(double t, double lr, double alpha_log);

// First recorded epoch with h(x_i)/y_i >= threshold, from the stored residuals.
std::vector<std::optional<std::int64_t>> fit_events(const Trajectory& traj, double threshold);

// He-uniform draw: hidden weights U[-1/sqrt(d), 1/sqrt(d)], output weights U[-1/sqrt(m), 1/sqrt(m)].
DenseNetwork he_uniform_init(int m, int d, std::uint64_t seed);

struct GradientDiagnostics {
  std::vector<Eigen::VectorXd> dynamical;  // fD_j, ambient
  Eigen::VectorXd fitted_error;            // E = -(1/n) sum_{i in fitted} r_i x_i
};

GradientDiagnostics gradient_diagnostics(const DenseNetwork& net, const OrthonormalDataset& data,
                                         std::span<const int> fitted);
GradientDiagnostics gradient_diagnostics(std::span<const ScaledNeuron> state,
                                         const OrthonormalDataset& data, std::span<const int> fitted);

// Columns: epoch, t, loss, lnw_1..lnw_m, lna_1..lna_m, then r_1..r_n when requested.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out, bool include_residuals);
// Reads samples back (epoch, t, loss, log-norms and optional residuals).
Trajectory read_trajectory_csv(std::istream& in, int m, int n);

}  // namespace s2s
