#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "s2s/core_model.hpp"
#include "s2s/error.hpp"

using namespace s2s;

TEST_CASE("identity dataset projects and lifts trivially") {
  const auto data = OrthonormalDataset::identity(testing::vec({1.0, -2.0, 0.5}));
  CHECK(data.n() == 3);
  CHECK(data.d() == 3);
  CHECK(data.is_identity());
  const Eigen::VectorXd v = testing::vec({0.3, -0.1, 2.0});
  CHECK((data.project(v) - v).norm() == 0.0);
  CHECK((data.lift(v) - v).norm() == 0.0);
  CHECK(data.max_gram_error() == 0.0);
}

TEST_CASE("explicit inputs must be orthonormal") {
  Eigen::MatrixXd x(2, 2);
  x << 1.0, 0.0, 0.5, 0.5;
  CHECK_THROWS_AS(OrthonormalDataset::explicit_inputs(x, testing::vec({1.0, 1.0})), Error);
  try {
    OrthonormalDataset::explicit_inputs(x, testing::vec({1.0, 1.0}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOrthonormal);
  }
  Eigen::MatrixXd ok(2, 3);
  ok << 0.6, 0.8, 0.0, 0.0, 0.0, 1.0;
  const auto data = OrthonormalDataset::explicit_inputs(ok, testing::vec({1.0, -1.0}));
  CHECK(data.d() == 3);
  CHECK(data.max_gram_error() <= 1e-12);
}

TEST_CASE("random orthonormal basis: Gram error, label stream shared with identity") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto rot = generate_dataset(16, 24, LabelSpec::gaussian(), Basis::RandomOrthonormal, seed);
    CHECK(rot.max_gram_error() <= 1e-12);
    const auto id = generate_dataset(16, 16, LabelSpec::gaussian(), Basis::Identity, seed);
    CHECK((rot.labels() - id.labels()).norm() == 0.0);
  }
}

TEST_CASE("generate_dataset argument errors") {
  CHECK_THROWS_AS(generate_dataset(8, 4, LabelSpec::gaussian(), Basis::RandomOrthonormal, 0), Error);
  CHECK_THROWS_AS(generate_dataset(8, 9, LabelSpec::gaussian(), Basis::Identity, 0), Error);
  CHECK_THROWS_AS(generate_dataset(3, 3, LabelSpec::explicit_values({1.0}), Basis::Identity, 0), Error);
}

TEST_CASE("label kinds") {
  const auto abs = generate_dataset(50, 50, LabelSpec::abs_gaussian(), Basis::Identity, 7);
  CHECK(abs.labels().minCoeff() > 0.0);
  const auto cst = generate_dataset(5, 5, LabelSpec::constant_value(2.5), Basis::Identity, 7);
  CHECK((cst.labels().array() == 2.5).all());
  const auto ex = generate_dataset(2, 2, LabelSpec::explicit_values({1.0, 2.0}), Basis::Identity, 7);
  CHECK(ex.label(1) == 2.0);
}

TEST_CASE("sample_init: unit directions, signs, determinism") {
  const auto a = sample_init(10, 7, -3.0, 42);
  const auto b = sample_init(10, 7, -3.0, 42);
  CHECK(a.directions == b.directions);
  CHECK(a.signs == b.signs);
  for (int j = 0; j < a.m; ++j) {
    CHECK(a.directions.row(j).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((a.signs[j] == 1 || a.signs[j] == -1));
  }
  const auto c = sample_init(10, 7, -3.0, 43);
  CHECK(c.directions != a.directions);
}

TEST_CASE("mask_matrix: entries need positive preactivation and matching sign") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto data = generate_dataset(12, 12, LabelSpec::gaussian(), Basis::Identity, seed);
    const auto init = sample_init(5, 12, -1.0, seed);
    const auto mask = mask_matrix(data, init);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 5; ++j) {
        const bool expect = init.directions(j, i) > 0.0 && sign_of(data.label(i)) == init.signs[j];
        CHECK(mask(i, j) == expect);
      }
    }
  }
}

TEST_CASE("MaskMatrix rejects entries that violate the sign invariant") {
  CHECK_THROWS_AS(MaskMatrix(1, 1, {1}, {1}, {-1}), Error);
  const MaskMatrix ok(2, 2, {1, 0, 0, 1}, {1, -1}, {1, -1});
  CHECK(ok.support(0) == std::vector<int>{0});
  CHECK(ok.support(1) == std::vector<int>{1});
  CHECK(ok.neurons_with_sign(-1) == std::vector<int>{1});
  CHECK(ok.data_with_sign(1) == std::vector<int>{0});
}

TEST_CASE("dense_from_init is balanced and rejects underflow") {
  const auto init = sample_init(4, 6, -2.0, 3);
  const auto net = dense_from_init(init);
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(net.a(j)) == doctest::Approx(net.W.row(j).norm()).epsilon(1e-14));
  }
  try {
    dense_from_init(sample_init(4, 6, -800.0, 3));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadScale);
  }
}

TEST_CASE("forward, residuals and loss") {
  const auto data = OrthonormalDataset::identity(testing::vec({1.0, 2.0}));
  DenseNetwork net = DenseNetwork::zeros(2, 2);
  CHECK(loss(net, data) == doctest::Approx((1.0 + 4.0) / 4.0));
  net.a << 1.0, std::sqrt(2.0);
  net.W << 1.0, 0.0, 0.0, std::sqrt(2.0);
  CHECK(outputs(net, data)(0) == doctest::Approx(1.0));
  CHECK(outputs(net, data)(1) == doctest::Approx(2.0));
  CHECK(loss(net, data) == doctest::Approx(0.0).epsilon(1e-30));
  CHECK(forward(net, testing::vec({-1.0, -1.0})) == 0.0);
}

TEST_CASE("rotate_init keeps every preactivation") {
  const auto rot = generate_dataset(8, 11, LabelSpec::gaussian(), Basis::RandomOrthonormal, 5);
  const auto id = generate_dataset(8, 8, LabelSpec::gaussian(), Basis::Identity, 5);
  const auto init = sample_init(4, 8, -1.0, 9);
  const auto rinit = rotate_init(init, rot);
  CHECK(rinit.d() == 11);
  for (int j = 0; j < 4; ++j) {
    const Eigen::VectorXd p = rot.project(rinit.directions.row(j).transpose());
    const Eigen::VectorXd q = id.project(init.directions.row(j).transpose());
    CHECK((p - q).norm() <= 1e-12);
  }
  const auto a = mask_matrix(id, init);
  const auto b = mask_matrix(rot, rinit);
  CHECK(testing::rows_of(a) == testing::rows_of(b));
}
