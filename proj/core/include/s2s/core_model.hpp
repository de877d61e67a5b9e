#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace s2s {

enum class Basis { Identity, RandomOrthonormal };

enum class LabelKind { Explicit, AbsGaussian, Gaussian, Constant };

struct LabelSpec {
  LabelKind kind = LabelKind::AbsGaussian;
  std::vector<double> values;  // Explicit only
  double constant = 1.0;       // Constant only

  static LabelSpec explicit_values(std::vector<double> values);
  static LabelSpec abs_gaussian() { return {LabelKind::AbsGaussian, {}, 1.0}; }
  static LabelSpec gaussian() { return {LabelKind::Gaussian, {}, 1.0}; }
  static LabelSpec constant_value(double c) { return {LabelKind::Constant, {}, c}; }
};

// n labelled points whose inputs are pairwise orthonormal. The identity basis
// (x_i = e_i, d = n) is stored implicitly so that n in the thousands stays
// cheap; explicit inputs are an n x d matrix with orthonormal rows.
class OrthonormalDataset {
 public:
  static OrthonormalDataset identity(Eigen::VectorXd labels);
  // Throws NotOrthonormal if the Gram matrix deviates from I by more than 1e-12.
  static OrthonormalDataset explicit_inputs(Eigen::MatrixXd inputs, Eigen::VectorXd labels);

  int n() const noexcept { return static_cast<int>(labels_.size()); }
  int d() const noexcept { return d_; }
  bool is_identity() const noexcept { return !inputs_.has_value(); }
  const Eigen::VectorXd& labels() const noexcept { return labels_; }
  double label(int i) const { return labels_(i); }

  // n x d input matrix (materialized for the identity basis).
  Eigen::MatrixXd input_matrix() const;
  Eigen::VectorXd input(int i) const;

  // X v : coordinates of an ambient d-vector against the data directions.
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  // X^T c : ambient vector sum_i c_i x_i.
  Eigen::VectorXd lift(const Eigen::VectorXd& coefficients) const;

  bool has_zero_label() const;
  std::vector<int> zero_label_indices() const;
  double max_gram_error() const;

 private:
  OrthonormalDataset(int d, Eigen::VectorXd labels, std::optional<Eigen::MatrixXd> inputs)
      : d_(d), labels_(std::move(labels)), inputs_(std::move(inputs)) {}

  int d_ = 0;
  Eigen::VectorXd labels_;
  std::optional<Eigen::MatrixXd> inputs_;
};

OrthonormalDataset generate_dataset(int n, int d, const LabelSpec& labels, Basis basis,
                                    std::uint64_t seed);

// Balanced initialization a_j(0) = alpha s_j, w_j(0) = alpha u_j, kept in
// log-scale so that alpha = e^-500 is representable.
struct InitDraw {
  int m = 0;
  double alpha_log = 0.0;
  std::vector<int> signs;      // s_j in {-1, +1}
  Eigen::MatrixXd directions;  // m x d, unit rows u_j

  int d() const noexcept { return static_cast<int>(directions.cols()); }
};

InitDraw sample_init(int m, int d, double alpha_log, std::uint64_t seed);

// Builds a draw from caller-supplied directions (normalized here) and signs.
InitDraw make_init(std::vector<int> signs, Eigen::MatrixXd directions, double alpha_log);

// Maps each direction u_j to X^T u_j restricted to the first n coordinates,
// so that an identity-basis draw and a rotated dataset see the same
// preactivations: (X^T u)^T x_i = u_i.
InitDraw rotate_init(const InitDraw& identity_init, const OrthonormalDataset& rotated);

class MaskMatrix {
 public:
  MaskMatrix(int n, int m, std::vector<std::uint8_t> entries, std::vector<int> neuron_signs,
             std::vector<int> label_signs);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  bool operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * m_ + j] != 0; }
  int neuron_sign(int j) const { return neuron_signs_[j]; }
  int label_sign(int i) const { return label_signs_[i]; }
  const std::vector<int>& neuron_signs() const noexcept { return neuron_signs_; }

  std::vector<int> support(int j) const;  // S_j = {i : A_ij = 1}
  std::vector<int> data_with_sign(int sign) const;
  std::vector<int> neurons_with_sign(int sign) const;
  std::vector<int> column(int j) const;

 private:
  int n_;
  int m_;
  std::vector<std::uint8_t> entries_;  // row-major n x m
  std::vector<int> neuron_signs_;
  std::vector<int> label_signs_;
};

int sign_of(double x) noexcept;

MaskMatrix mask_matrix(const OrthonormalDataset& data, const InitDraw& init);

// Plain-float network h(x) = sum_j a_j relu(w_j^T x).
struct DenseNetwork {
  Eigen::VectorXd a;  // m
  Eigen::MatrixXd W;  // m x d

  int m() const noexcept { return static_cast<int>(a.size()); }
  int d() const noexcept { return static_cast<int>(W.cols()); }

  static DenseNetwork zeros(int m, int d);
};

// Throws BadScale when e^alpha_log underflows.
DenseNetwork dense_from_init(const InitDraw& init);

double forward(const DenseNetwork& net, const Eigen::VectorXd& x);
Eigen::VectorXd outputs(const DenseNetwork& net, const OrthonormalDataset& data);
Eigen::VectorXd residual_vector(const DenseNetwork& net, const OrthonormalDataset& data);
double loss(const DenseNetwork& net, const OrthonormalDataset& data);

}  // namespace s2s
