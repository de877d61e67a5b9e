#include "s2s/core_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "s2s/error.hpp"
#include "s2s/random.hpp"

namespace s2s {

namespace {

constexpr double kGramTolerance = 1e-12;

std::string dims(int a, int b) { return std::to_string(a) + " vs " + std::to_string(b); }

}  // namespace

LabelSpec LabelSpec::explicit_values(std::vector<double> values) {
  LabelSpec spec;
  spec.kind = LabelKind::Explicit;
  spec.values = std::move(values);
  return spec;
}

OrthonormalDataset OrthonormalDataset::identity(Eigen::VectorXd labels) {
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(labels(i))) throw Error(ErrorCode::InvalidArgument, "non-finite label");
  }
  const int n = static_cast<int>(labels.size());
  return OrthonormalDataset(n, std::move(labels), std::nullopt);
}

OrthonormalDataset OrthonormalDataset::explicit_inputs(Eigen::MatrixXd inputs,
                                                       Eigen::VectorXd labels) {
  if (inputs.rows() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "input rows vs labels " + dims(int(inputs.rows()), int(labels.size())));
  }
  if (inputs.cols() < inputs.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "d < n");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(labels(i))) throw Error(ErrorCode::InvalidArgument, "non-finite label");
  }
  const int d = static_cast<int>(inputs.cols());
  OrthonormalDataset data(d, std::move(labels), std::move(inputs));
  if (data.max_gram_error() > kGramTolerance) {
    throw Error(ErrorCode::NotOrthonormal,
                "Gram matrix deviates from identity by " + std::to_string(data.max_gram_error()));
  }
  return data;
}

Eigen::MatrixXd OrthonormalDataset::input_matrix() const {
  if (inputs_) return *inputs_;
  return Eigen::MatrixXd::Identity(n(), d_);
}

Eigen::VectorXd OrthonormalDataset::input(int i) const {
  if (inputs_) return inputs_->row(i).transpose();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d_);
  e(i) = 1.0;
  return e;
}

Eigen::VectorXd OrthonormalDataset::project(const Eigen::VectorXd& v) const {
  if (inputs_) return (*inputs_) * v;
  return v.head(n());
}

Eigen::VectorXd OrthonormalDataset::lift(const Eigen::VectorXd& coefficients) const {
  if (inputs_) return inputs_->transpose() * coefficients;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d_);
  out.head(n()) = coefficients;
  return out;
}

bool OrthonormalDataset::has_zero_label() const { return !zero_label_indices().empty(); }

std::vector<int> OrthonormalDataset::zero_label_indices() const {
  std::vector<int> out;
  for (int i = 0; i < n(); ++i) {
    if (labels_(i) == 0.0) out.push_back(i);
  }
  return out;
}

double OrthonormalDataset::max_gram_error() const {
  if (!inputs_) return 0.0;
  const Eigen::MatrixXd gram = (*inputs_) * inputs_->transpose();
  return (gram - Eigen::MatrixXd::Identity(n(), n())).cwiseAbs().maxCoeff();
}

OrthonormalDataset generate_dataset(int n, int d, const LabelSpec& labels, Basis basis,
                                    std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  if (d < n) throw Error(ErrorCode::DimensionMismatch, "d < n (" + dims(d, n) + ")");
  if (basis == Basis::Identity && d != n) {
    throw Error(ErrorCode::DimensionMismatch, "identity basis requires d == n (" + dims(d, n) + ")");
  }

  Eigen::VectorXd y(n);
  Rng label_rng = make_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (labels.kind) {
    case LabelKind::Explicit:
      if (static_cast<int>(labels.values.size()) != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "explicit labels " + dims(int(labels.values.size()), n));
      }
      for (int i = 0; i < n; ++i) y(i) = labels.values[i];
      break;
    case LabelKind::AbsGaussian:
      for (int i = 0; i < n; ++i) y(i) = std::abs(normal(label_rng));
      break;
    case LabelKind::Gaussian:
      for (int i = 0; i < n; ++i) y(i) = normal(label_rng);
      break;
    case LabelKind::Constant:
      y.setConstant(labels.constant);
      break;
  }

  if (basis == Basis::Identity) return OrthonormalDataset::identity(std::move(y));

  Rng basis_rng = make_rng(seed, 1);
  Eigen::MatrixXd gaussian(d, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < d; ++r) gaussian(r, c) = normal(basis_rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, n);
  return OrthonormalDataset::explicit_inputs(q.transpose(), std::move(y));
}

InitDraw sample_init(int m, int d, double alpha_log, std::uint64_t seed) {
  if (m < 1 || d < 1) throw Error(ErrorCode::InvalidArgument, "m and d must be positive");
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  InitDraw init;
  init.m = m;
  init.alpha_log = alpha_log;
  init.signs.resize(m);
  init.directions.resize(m, d);
  for (int j = 0; j < m; ++j) {
    init.signs[j] = coin(rng) ? 1 : -1;
    double norm = 0.0;
    do {
      for (int k = 0; k < d; ++k) init.directions(j, k) = normal(rng);
      norm = init.directions.row(j).norm();
    } while (norm == 0.0);
    init.directions.row(j) /= norm;
  }
  return init;
}

InitDraw make_init(std::vector<int> signs, Eigen::MatrixXd directions, double alpha_log) {
  if (static_cast<Eigen::Index>(signs.size()) != directions.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "signs vs directions " + dims(int(signs.size()), int(directions.rows())));
  }
  for (int s : signs) {
    if (s != 1 && s != -1) throw Error(ErrorCode::InvalidArgument, "signs must be +1 or -1");
  }
  for (Eigen::Index j = 0; j < directions.rows(); ++j) {
    const double norm = directions.row(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorCode::InvalidArgument, "direction " + std::to_string(j) + " has zero norm");
    }
    directions.row(j) /= norm;
  }
  InitDraw init;
  init.m = static_cast<int>(signs.size());
  init.alpha_log = alpha_log;
  init.signs = std::move(signs);
  init.directions = std::move(directions);
  return init;
}

InitDraw rotate_init(const InitDraw& identity_init, const OrthonormalDataset& rotated) {
  if (identity_init.d() != rotated.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "identity init dimension vs rotated n " + dims(identity_init.d(), rotated.n()));
  }
  InitDraw out = identity_init;
  out.directions = identity_init.directions * rotated.input_matrix();
  return out;
}

int sign_of(double x) noexcept { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

MaskMatrix::MaskMatrix(int n, int m, std::vector<std::uint8_t> entries,
                       std::vector<int> neuron_signs, std::vector<int> label_signs)
    : n_(n),
      m_(m),
      entries_(std::move(entries)),
      neuron_signs_(std::move(neuron_signs)),
      label_signs_(std::move(label_signs)) {
  if (entries_.size() != static_cast<std::size_t>(n) * m || neuron_signs_.size() != std::size_t(m) ||
      label_signs_.size() != std::size_t(n)) {
    throw Error(ErrorCode::DimensionMismatch, "mask matrix shape");
  }
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < m_; ++j) {
      if ((*this)(i, j) && label_signs_[i] != neuron_signs_[j]) {
        throw Error(ErrorCode::InvalidArgument,
                    "mask entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") set across label/neuron signs");
      }
    }
  }
}

std::vector<int> MaskMatrix::support(int j) const {
  std::vector<int> out;
  for (int i = 0; i < n_; ++i) {
    if ((*this)(i, j)) out.push_back(i);
  }
  return out;
}

std::vector<int> MaskMatrix::column(int j) const {
  std::vector<int> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = (*this)(i, j) ? 1 : 0;
  return out;
}

std::vector<int> MaskMatrix::data_with_sign(int sign) const {
  std::vector<int> out;
  for (int i = 0; i < n_; ++i) {
    if (label_signs_[i] == sign) out.push_back(i);
  }
  return out;
}

std::vector<int> MaskMatrix::neurons_with_sign(int sign) const {
  std::vector<int> out;
  for (int j = 0; j < m_; ++j) {
    if (neuron_signs_[j] == sign) out.push_back(j);
  }
  return out;
}

MaskMatrix mask_matrix(const OrthonormalDataset& data, const InitDraw& init) {
  if (data.d() != init.d()) {
    throw Error(ErrorCode::DimensionMismatch, "dataset vs init dimension " + dims(data.d(), init.d()));
  }
  const int n = data.n();
  const int m = init.m;
  std::vector<std::uint8_t> entries(static_cast<std::size_t>(n) * m, 0);
  std::vector<int> label_signs(n);
  for (int i = 0; i < n; ++i) label_signs[i] = sign_of(data.label(i));
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd pre = data.project(init.directions.row(j).transpose());
    for (int i = 0; i < n; ++i) {
      entries[static_cast<std::size_t>(i) * m + j] = (pre(i) > 0.0 && label_signs[i] == init.signs[j]) ? 1 : 0;
    }
  }
  return MaskMatrix(n, m, std::move(entries), init.signs, std::move(label_signs));
}

DenseNetwork DenseNetwork::zeros(int m, int d) {
  return {Eigen::VectorXd::Zero(m), Eigen::MatrixXd::Zero(m, d)};
}

DenseNetwork dense_from_init(const InitDraw& init) {
  const double alpha = std::exp(init.alpha_log);
  if (!(alpha >= std::numeric_limits<double>::min()) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::BadScale,
                "alpha = exp(" + std::to_string(init.alpha_log) + ") is not a normal double");
  }
  DenseNetwork net;
  net.a.resize(init.m);
  for (int j = 0; j < init.m; ++j) net.a(j) = alpha * init.signs[j];
  net.W = alpha * init.directions;
  return net;
}

double forward(const DenseNetwork& net, const Eigen::VectorXd& x) {
  if (x.size() != net.d()) throw Error(ErrorCode::DimensionMismatch, "forward input dimension");
  double h = 0.0;
  for (int j = 0; j < net.m(); ++j) {
    const double pre = net.W.row(j).dot(x);
    if (pre > 0.0) h += net.a(j) * pre;
  }
  return h;
}

Eigen::VectorXd outputs(const DenseNetwork& net, const OrthonormalDataset& data) {
  if (net.d() != data.d()) throw Error(ErrorCode::DimensionMismatch, "network vs dataset dimension");
  Eigen::VectorXd h = Eigen::VectorXd::Zero(data.n());
  for (int j = 0; j < net.m(); ++j) {
    const Eigen::VectorXd pre = data.project(net.W.row(j).transpose());
    h += net.a(j) * pre.cwiseMax(0.0);
  }
  return h;
}

Eigen::VectorXd residual_vector(const DenseNetwork& net, const OrthonormalDataset& data) {
  return outputs(net, data) - data.labels();
}

double loss(const DenseNetwork& net, const OrthonormalDataset& data) {
  return residual_vector(net, data).squaredNorm() / (2.0 * data.n());
}

}  // namespace s2s
