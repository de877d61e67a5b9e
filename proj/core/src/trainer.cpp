#include "s2s/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "s2s/error.hpp"
#include "s2s/random.hpp"

namespace s2s {

namespace {

const double kMinNormal = std::numeric_limits<double>::min();
const double kLogMinNormal = std::log(std::numeric_limits<double>::min());
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

void append_number(std::string& line, double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  line.append(buf, res.ptr);
}

double parse_number(std::string_view field) {
  double x = 0.0;
  // from_chars does not accept a leading '+'.
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw Error(ErrorCode::Io, "bad number in CSV: '" + std::string(field) + "'");
  }
  return x;
}

}  // namespace

bool RenormBand::contains(const ScaledNeuron& neuron) const {
  const double vn = neuron.v.norm();
  return vn >= low && vn <= high && neuron.b >= low && neuron.b <= high;
}

ScaledNeuron renormalize(ScaledNeuron neuron) {
  const double vn = neuron.v.norm();
  if (!(vn > 0.0) || !(neuron.b > 0.0)) {
    throw Error(ErrorCode::CollapsedNeuron, "mantissa underflowed (||v|| = " + std::to_string(vn) +
                                                ", b = " + std::to_string(neuron.b) + ")");
  }
  const double r = std::sqrt(vn * neuron.b);
  neuron.c += std::log(r);
  neuron.v /= r;
  neuron.b /= r;
  return neuron;
}

std::vector<ScaledNeuron> scaled_from_init(const InitDraw& init) {
  std::vector<ScaledNeuron> state(init.m);
  for (int j = 0; j < init.m; ++j) {
    state[j].v = init.directions.row(j).transpose();
    state[j].b = 1.0;
    state[j].c = init.alpha_log;
    state[j].s = init.signs[j];
  }
  return state;
}

DenseNetwork materialize(std::span<const ScaledNeuron> state) {
  const int m = static_cast<int>(state.size());
  const int d = m == 0 ? 0 : static_cast<int>(state[0].v.size());
  DenseNetwork net = DenseNetwork::zeros(m, d);
  for (int j = 0; j < m; ++j) {
    net.a(j) = state[j].a();
    net.W.row(j) = state[j].w().transpose();
  }
  return net;
}

void TrainerConfig::validate() const {
  if (!(lr > 0.0)) throw Error(ErrorCode::InvalidArgument, "lr must be positive");
  if (!(loss_stop >= 0.0)) throw Error(ErrorCode::InvalidArgument, "loss_stop must be non-negative");
  if (!(fit_threshold > 0.0 && fit_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fit_threshold must lie in (0, 1)");
  }
  if (max_epochs < 0) throw Error(ErrorCode::InvalidArgument, "max_epochs must be non-negative");
  if (record_every < 1) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  if (!(band.low > 0.0 && band.low < 1.0 && band.high > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "renormalization band must straddle 1");
  }
}

// ---------------------------------------------------------------------------
// Log-domain gradient descent

ScaledGradientDescent::ScaledGradientDescent(const OrthonormalDataset& data, double lr, RenormBand band)
    : data_(data), lr_(lr), band_(band) {}

const StepInfo& ScaledGradientDescent::evaluate(std::span<const ScaledNeuron> state) {
  const int n = data_.n();
  const int m = static_cast<int>(state.size());
  preact_.resize(m);
  info_.outputs.setZero(n);

  for (int j = 0; j < m; ++j) {
    const ScaledNeuron& neuron = state[j];
    if (neuron.v.size() != data_.d()) throw Error(ErrorCode::DimensionMismatch, "neuron dimension");
    if (data_.is_identity()) {
      preact_[j] = neuron.v;
    } else {
      preact_[j] = data_.project(neuron.v);
    }
    const Eigen::VectorXd& p = preact_[j];

    // h_i += s e^{2c} b relu(p_i); p_i <= ||v|| so the whole neuron can be
    // skipped once its largest possible contribution is subnormal.
    const double log_scale = 2.0 * neuron.c + std::log(neuron.b);
    const double p_max = p.maxCoeff();
    if (!(p_max > 0.0) || log_scale + std::log(p_max) < kLogMinNormal) continue;

    const double s = neuron.s;
    if (log_scale >= kLogMinNormal) {
      const double factor = std::exp(log_scale);
      for (int i = 0; i < n; ++i) {
        if (p(i) <= 0.0) continue;
        const double contrib = factor * p(i);
        if (contrib >= kMinNormal) info_.outputs(i) += s * contrib;
      }
    } else {
      for (int i = 0; i < n; ++i) {
        if (p(i) <= 0.0) continue;
        const double log_contrib = log_scale + std::log(p(i));
        if (log_contrib >= kLogMinNormal) info_.outputs(i) += s * std::exp(log_contrib);
      }
    }
  }

  info_.residuals = info_.outputs - data_.labels();
  info_.loss = info_.residuals.squaredNorm() / (2.0 * n);
  if (!std::isfinite(info_.loss)) throw Error(ErrorCode::NonFinite, "loss is not finite");
  return info_;
}

void ScaledGradientDescent::apply(std::span<ScaledNeuron> state) {
  const int n = data_.n();
  const int m = static_cast<int>(state.size());
  if (static_cast<int>(preact_.size()) != m) {
    throw Error(ErrorCode::InvalidArgument, "apply() without a matching evaluate()");
  }
  Eigen::VectorXd coef(n);
  for (int j = 0; j < m; ++j) {
    ScaledNeuron& neuron = state[j];
    const Eigen::VectorXd& p = preact_[j];
    // fD_j = X^T coef with coef_i = -(1/n) r_i 1{p_i > 0}
    for (int i = 0; i < n; ++i) coef(i) = p(i) > 0.0 ? -info_.residuals(i) / n : 0.0;
    const double s = neuron.s;
    const double fd_dot_v = coef.dot(p);
    const double v_step = lr_ * s * neuron.b;
    if (data_.is_identity()) {
      neuron.v.head(n) += v_step * coef;
    } else {
      neuron.v += v_step * data_.lift(coef);
    }
    neuron.b += lr_ * s * fd_dot_v;

    if (!std::isfinite(neuron.b) || !finite(neuron.v)) {
      throw Error(ErrorCode::NonFinite, "update of neuron " + std::to_string(j) + " is not finite");
    }
    if (!(neuron.b > 0.0)) {
      throw Error(ErrorCode::CollapsedNeuron,
                  "output mantissa of neuron " + std::to_string(j) + " reached zero");
    }
    if (!band_.contains(neuron)) neuron = renormalize(std::move(neuron));
  }
}

StepInfo ScaledGradientDescent::step(std::span<ScaledNeuron> state) {
  StepInfo before = evaluate(state);
  apply(state);
  return before;
}

std::vector<double> ScaledGradientDescent::dynamical_norms() const {
  const int n = data_.n();
  std::vector<double> out(preact_.size());
  for (std::size_t j = 0; j < preact_.size(); ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (preact_[j](i) > 0.0) acc += info_.residuals(i) * info_.residuals(i);
    }
    out[j] = std::sqrt(acc) / n;
  }
  return out;
}

void gd_step(std::vector<ScaledNeuron>& state, const OrthonormalDataset& data, double lr) {
  ScaledGradientDescent(data, lr).step(state);
}

// ---------------------------------------------------------------------------
// Plain-float gradient descent

DenseGradientDescent::DenseGradientDescent(const OrthonormalDataset& data, double lr)
    : data_(data), lr_(lr) {}

const StepInfo& DenseGradientDescent::evaluate(const DenseNetwork& net) {
  if (net.d() != data_.d()) throw Error(ErrorCode::DimensionMismatch, "network vs dataset dimension");
  if (data_.is_identity()) {
    preact_ = net.W.transpose();
  } else {
    preact_ = data_.input_matrix() * net.W.transpose();
  }
  info_.outputs = preact_.cwiseMax(0.0) * net.a;
  info_.residuals = info_.outputs - data_.labels();
  info_.loss = info_.residuals.squaredNorm() / (2.0 * data_.n());
  if (!std::isfinite(info_.loss)) throw Error(ErrorCode::NonFinite, "loss is not finite");
  return info_;
}

void DenseGradientDescent::apply(DenseNetwork& net) {
  const int n = data_.n();
  const int m = net.m();
  // coef(i, j) = -(1/n) r_i 1{p_ij > 0}
  Eigen::MatrixXd coef = (preact_.array() > 0.0).cast<double>().matrix();
  coef.array().colwise() *= (-info_.residuals.array() / n);
  const Eigen::VectorXd a_step = lr_ * (coef.cwiseProduct(preact_)).colwise().sum().transpose();
  if (data_.is_identity()) {
    for (int j = 0; j < m; ++j) net.W.row(j) += (lr_ * net.a(j)) * coef.col(j).transpose();
  } else {
    const Eigen::MatrixXd lifted = coef.transpose() * data_.input_matrix();  // m x d
    for (int j = 0; j < m; ++j) net.W.row(j) += (lr_ * net.a(j)) * lifted.row(j);
  }
  net.a += a_step;
  if (!net.a.allFinite() || !net.W.allFinite()) throw Error(ErrorCode::NonFinite, "dense update");
}

std::vector<double> DenseGradientDescent::dynamical_norms() const {
  const int n = data_.n();
  std::vector<double> out(static_cast<std::size_t>(preact_.cols()));
  for (Eigen::Index j = 0; j < preact_.cols(); ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (preact_(i, j) > 0.0) acc += info_.residuals(i) * info_.residuals(i);
    }
    out[j] = std::sqrt(acc) / n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

struct ScaledModel {
  ScaledGradientDescent stepper;
  std::vector<ScaledNeuron> state;

  const StepInfo& evaluate() { return stepper.evaluate(state); }
  void apply() { stepper.apply(state); }
  std::vector<double> dynamical_norms() const { return stepper.dynamical_norms(); }
  void log_norms(std::vector<double>& w, std::vector<double>& a) const {
    w.resize(state.size());
    a.resize(state.size());
    for (std::size_t j = 0; j < state.size(); ++j) {
      w[j] = state[j].log_w_norm();
      a[j] = state[j].log_a_abs();
    }
  }
  void capture(Trajectory& traj, std::int64_t epoch) const { traj.snapshots.push_back({epoch, state}); }
  void finish(Trajectory& traj) const {
    traj.final_state = state;
    traj.final_network = materialize(state);
  }
};

struct DenseModel {
  DenseGradientDescent stepper;
  DenseNetwork net;

  const StepInfo& evaluate() { return stepper.evaluate(net); }
  void apply() { stepper.apply(net); }
  std::vector<double> dynamical_norms() const { return stepper.dynamical_norms(); }
  void log_norms(std::vector<double>& w, std::vector<double>& a) const {
    w.resize(net.m());
    a.resize(net.m());
    for (int j = 0; j < net.m(); ++j) {
      w[j] = std::log(net.W.row(j).norm());
      a[j] = std::log(std::abs(net.a(j)));
    }
  }
  void capture(Trajectory& traj, std::int64_t epoch) const {
    // Dense states are stored as unscaled neurons (c = 0); zero output weights
    // cannot be represented with b > 0 and are skipped.
    Snapshot snap{epoch, {}};
    for (int j = 0; j < net.m(); ++j) {
      ScaledNeuron neuron;
      neuron.v = net.W.row(j).transpose();
      neuron.b = std::abs(net.a(j));
      neuron.s = net.a(j) < 0.0 ? -1 : 1;
      snap.state.push_back(std::move(neuron));
    }
    traj.snapshots.push_back(std::move(snap));
  }
  void finish(Trajectory& traj) const { traj.final_network = net; }
};

template <typename Model>
Trajectory run_training(Model& model, const OrthonormalDataset& data, const TrainerConfig& config,
                        std::optional<double> alpha_log) {
  config.validate();
  if (alpha_log && !(*alpha_log < 0.0)) alpha_log.reset();

  const int n = data.n();
  Trajectory traj;
  traj.lr = config.lr;
  traj.alpha_log = alpha_log;
  traj.fit_threshold = config.fit_threshold;
  traj.labels = data.labels();
  traj.fit_epochs.assign(n, std::nullopt);

  std::vector<std::int64_t> snapshot_epochs = config.snapshot_epochs;
  std::sort(snapshot_epochs.begin(), snapshot_epochs.end());
  std::size_t next_snapshot = 0;

  double previous_loss = kNaN;
  for (std::int64_t epoch = 0;; ++epoch) {
    const StepInfo& info = model.evaluate();

    if (epoch > 0 && previous_loss > 0.0) {
      traj.max_step_loss_increase =
          std::max(traj.max_step_loss_increase, (info.loss - previous_loss) / previous_loss);
    }
    previous_loss = info.loss;

    bool fit_now = false;
    for (int i = 0; i < n; ++i) {
      const double y = data.label(i);
      if (traj.fit_epochs[i] || y == 0.0) continue;
      if (info.outputs(i) / y >= config.fit_threshold) {
        traj.fit_epochs[i] = epoch;
        fit_now = true;
      }
    }

    const bool converged = info.loss < config.loss_stop;
    const bool stop = converged || epoch >= config.max_epochs;

    if (fit_now || stop || epoch % config.record_every == 0) {
      TrajectorySample sample;
      sample.epoch = epoch;
      sample.t = alpha_log ? accelerated_time(double(epoch), config.lr, *alpha_log) : kNaN;
      sample.loss = info.loss;
      model.log_norms(sample.log_w_norm, sample.log_a_abs);
      sample.dynamical_norm = model.dynamical_norms();
      if (config.record_residuals) sample.residuals = info.residuals;
      traj.samples.push_back(std::move(sample));
    }
    while (next_snapshot < snapshot_epochs.size() && snapshot_epochs[next_snapshot] <= epoch) {
      if (snapshot_epochs[next_snapshot] == epoch) model.capture(traj, epoch);
      ++next_snapshot;
    }

    if (stop) {
      traj.outcome = converged ? Outcome::Converged : Outcome::Budget;
      traj.epochs_run = epoch;
      traj.final_loss = info.loss;
      break;
    }
    model.apply();
  }
  model.finish(traj);
  return traj;
}

}  // namespace

Trajectory train(const OrthonormalDataset& data, const InitDraw& init, const TrainerConfig& config) {
  if (init.d() != data.d()) throw Error(ErrorCode::DimensionMismatch, "init vs dataset dimension");
  ScaledModel model{ScaledGradientDescent(data, config.lr, config.band), scaled_from_init(init)};
  return run_training(model, data, config, init.alpha_log);
}

Trajectory train_dense(const OrthonormalDataset& data, DenseNetwork init, const TrainerConfig& config,
                       std::optional<double> alpha_log) {
  if (init.d() != data.d()) throw Error(ErrorCode::DimensionMismatch, "init vs dataset dimension");
  DenseModel model{DenseGradientDescent(data, config.lr), std::move(init)};
  return run_training(model, data, config, alpha_log);
}

double accelerated_time(double epoch, double lr, double alpha_log) {
  if (!(alpha_log < 0.0)) throw Error(ErrorCode::BadScale, "alpha_log must be negative");
  return epoch * lr / (-alpha_log);
}

double epoch_at(double t, double lr, double alpha_log) {
  if (!(alpha_log < 0.0)) throw Error(ErrorCode::BadScale, "alpha_log must be negative");
  return t * (-alpha_log) / lr;
}

std::vector<std::optional<std::int64_t>> fit_events(const Trajectory& traj, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
  }
  const int n = static_cast<int>(traj.labels.size());
  std::vector<std::optional<std::int64_t>> out(n);
  for (const auto& sample : traj.samples) {
    if (sample.residuals.size() != n) continue;
    for (int i = 0; i < n; ++i) {
      const double y = traj.labels(i);
      if (out[i] || y == 0.0) continue;
      if ((sample.residuals(i) + y) / y >= threshold) out[i] = sample.epoch;
    }
  }
  return out;
}

DenseNetwork he_uniform_init(int m, int d, std::uint64_t seed) {
  if (m < 1 || d < 1) throw Error(ErrorCode::InvalidArgument, "m and d must be positive");
  Rng rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> hidden(-1.0 / std::sqrt(double(d)), 1.0 / std::sqrt(double(d)));
  std::uniform_real_distribution<double> output(-1.0 / std::sqrt(double(m)), 1.0 / std::sqrt(double(m)));
  DenseNetwork net = DenseNetwork::zeros(m, d);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < d; ++k) net.W(j, k) = hidden(rng);
  }
  for (int j = 0; j < m; ++j) net.a(j) = output(rng);
  return net;
}

namespace {

GradientDiagnostics diagnostics_from(const std::vector<Eigen::VectorXd>& preact,
                                     const Eigen::VectorXd& residuals, const OrthonormalDataset& data,
                                     std::span<const int> fitted) {
  const int n = data.n();
  GradientDiagnostics out;
  for (const auto& p : preact) {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (p(i) > 0.0) coef(i) = -residuals(i) / n;
    }
    out.dynamical.push_back(data.lift(coef));
  }
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(n);
  for (int i : fitted) coef(i) = -residuals(i) / n;
  out.fitted_error = data.lift(coef);
  return out;
}

}  // namespace

GradientDiagnostics gradient_diagnostics(const DenseNetwork& net, const OrthonormalDataset& data,
                                         std::span<const int> fitted) {
  std::vector<Eigen::VectorXd> preact;
  for (int j = 0; j < net.m(); ++j) preact.push_back(data.project(net.W.row(j).transpose()));
  return diagnostics_from(preact, residual_vector(net, data), data, fitted);
}

GradientDiagnostics gradient_diagnostics(std::span<const ScaledNeuron> state,
                                         const OrthonormalDataset& data, std::span<const int> fitted) {
  ScaledGradientDescent stepper(data, 1.0);
  const Eigen::VectorXd residuals = stepper.evaluate(state).residuals;
  std::vector<Eigen::VectorXd> preact;
  for (const auto& neuron : state) preact.push_back(data.project(neuron.v));
  return diagnostics_from(preact, residuals, data, fitted);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out, bool include_residuals) {
  const std::size_t m = traj.samples.empty() ? 0 : traj.samples.front().log_w_norm.size();
  const auto n = static_cast<std::size_t>(traj.labels.size());
  std::string line = "epoch,t,loss";
  for (std::size_t j = 1; j <= m; ++j) line += ",lnw_" + std::to_string(j);
  for (std::size_t j = 1; j <= m; ++j) line += ",lna_" + std::to_string(j);
  if (include_residuals) {
    for (std::size_t i = 1; i <= n; ++i) line += ",r_" + std::to_string(i);
  }
  line += '\n';
  out << line;
  for (const auto& sample : traj.samples) {
    line = std::to_string(sample.epoch);
    line += ',';
    append_number(line, sample.t);
    line += ',';
    append_number(line, sample.loss);
    for (double x : sample.log_w_norm) {
      line += ',';
      append_number(line, x);
    }
    for (double x : sample.log_a_abs) {
      line += ',';
      append_number(line, x);
    }
    if (include_residuals) {
      if (static_cast<std::size_t>(sample.residuals.size()) != n) {
        throw Error(ErrorCode::InvalidArgument, "residuals were not recorded");
      }
      for (std::size_t i = 0; i < n; ++i) {
        line += ',';
        append_number(line, sample.residuals(static_cast<Eigen::Index>(i)));
      }
    }
    line += '\n';
    out << line;
  }
}

Trajectory read_trajectory_csv(std::istream& in, int m, int n) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty trajectory CSV");
  const auto count_fields = [](const std::string& s) {
    return static_cast<int>(std::count(s.begin(), s.end(), ',')) + 1;
  };
  const int columns = count_fields(line);
  bool with_residuals = false;
  if (columns == 3 + 2 * m + n) {
    with_residuals = true;
  } else if (columns != 3 + 2 * m) {
    throw Error(ErrorCode::Io, "trajectory CSV has " + std::to_string(columns) + " columns");
  }

  Trajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(parse_number(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (static_cast<int>(fields.size()) != columns) throw Error(ErrorCode::Io, "ragged trajectory CSV");
    TrajectorySample sample;
    sample.epoch = static_cast<std::int64_t>(fields[0]);
    sample.t = fields[1];
    sample.loss = fields[2];
    sample.log_w_norm.assign(fields.begin() + 3, fields.begin() + 3 + m);
    sample.log_a_abs.assign(fields.begin() + 3 + m, fields.begin() + 3 + 2 * m);
    if (with_residuals) {
      sample.residuals = Eigen::Map<const Eigen::VectorXd>(fields.data() + 3 + 2 * m, n);
    }
    traj.samples.push_back(std::move(sample));
  }
  if (!traj.samples.empty()) {
    traj.epochs_run = traj.samples.back().epoch;
    traj.final_loss = traj.samples.back().loss;
  }
  return traj;
}

}  // namespace s2s
