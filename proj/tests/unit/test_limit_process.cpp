#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "s2s/analysis.hpp"
#include "s2s/error.hpp"
#include "s2s/limit_process.hpp"

using namespace s2s;

namespace {

LimitProcess nested() {
  const Eigen::VectorXd y = testing::vec({1.0, 2.0});
  return build(testing::mask_from_rows({{1, 1}, {0, 1}}, {1, 1}, y), y);
}

LimitProcess disjoint() {
  const Eigen::VectorXd y = testing::vec({1.0, 2.0});
  return build(testing::mask_from_rows({{1, 0}, {0, 1}}, {1, 1}, y), y);
}

LimitProcess random_instance(std::uint64_t seed, int n, int m) {
  const auto data = generate_dataset(n, n, LabelSpec::gaussian(), Basis::Identity, seed);
  const auto init = sample_init(m, n, -1.0, seed + 1000);
  return build(mask_matrix(data, init), data.labels());
}

}  // namespace

TEST_CASE("nested supports: one jump fits both data") {
  const auto lp = nested();
  REQUIRE(lp.stage_count() == 1);
  CHECK(*lp.stages[0].selected == 1);
  CHECK(lp.jump_times[1] == doctest::Approx(1.0 / std::sqrt(1.25)).epsilon(1e-15));
  CHECK(std::isinf(lp.jump_times[2]));
  CHECK(lp.stages[0].d_norms[1] == doctest::Approx(std::sqrt(5.0) / 2.0));
  CHECK(pred_sq_norm(lp) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(lp.interpolating);
  // neuron 0 is never selected and ends with zero output weight
  CHECK(lp.final_params.a(0) == 0.0);
}

TEST_CASE("disjoint supports: two jumps, frozen exponents and parameters") {
  const auto lp = disjoint();
  REQUIRE(lp.stage_count() == 2);
  CHECK(lp.jump_times[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp.jump_times[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(*lp.stages[0].selected == 1);
  CHECK(*lp.stages[1].selected == 0);
  CHECK(exponent_at(lp, 0, 1.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(exponent_at(lp, 1, 1.0) == 0.0);
  CHECK(exponent_at(lp, 0, 1.5) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(lp.final_params.a(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp.final_params.a(1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(pred_sq_norm(lp) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(network_sq_norm(lp.final_params) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(opt_sq_norm(lp.labels) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("stage_at and theta_at between jumps") {
  const auto lp = disjoint();
  CHECK(lp.stage_at(0.0) == 0);
  CHECK(lp.stage_at(0.999) == 0);
  CHECK(lp.stage_at(1.0) == 1);
  CHECK(lp.stage_at(1e9) == 2);
  CHECK(network_sq_norm(theta_at(lp, 0.5)) == 0.0);
  CHECK(network_sq_norm(theta_at(lp, 1.5)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(theta_at(lp, -1.0), Error);
}

TEST_CASE("strict mode rejects zero labels and ties") {
  const Eigen::VectorXd zero = testing::vec({1.0, 0.0});
  const auto mask = testing::mask_from_rows({{1, 0}, {0, 0}}, {1, 1}, zero);
  try {
    build(mask, zero, {true});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroLabel);
  }
  CHECK_NOTHROW(build(mask, zero));

  const Eigen::VectorXd y = testing::vec({1.0, 1.0});
  const auto tied = testing::mask_from_rows({{1, 0}, {0, 1}}, {1, 1}, y);
  try {
    build(tied, y, {true});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AmbiguousArgmax);
  }
  const auto lenient = build(tied, y);
  CHECK(*lenient.stages[0].selected == 0);
  CHECK(lenient.assumption_report.argmax_unique == false);
  CHECK_FALSE(lenient.assumption_report.passed());
}

TEST_CASE("check_assumptions flags") {
  const Eigen::VectorXd y = testing::vec({1.0, 2.0, 3.0});
  const auto good = check_assumptions(testing::mask_from_rows({{1, 0}, {0, 1}, {1, 1}}, {1, 1}, y), y);
  CHECK(good.mask_conditions());
  CHECK(good.labels_nonzero);
  CHECK_FALSE(good.argmax_unique.has_value());

  const auto zero_row = check_assumptions(testing::mask_from_rows({{1, 0}, {0, 1}, {0, 0}}, {1, 1}, y), y);
  CHECK_FALSE(zero_row.rows_nonzero);
  const auto zero_col = check_assumptions(testing::mask_from_rows({{1, 0}, {1, 0}, {1, 0}}, {1, 1}, y), y);
  CHECK_FALSE(zero_col.cols_nonzero);
  const auto duplicate = check_assumptions(testing::mask_from_rows({{1, 1}, {1, 1}, {1, 1}}, {1, 1}, y), y);
  CHECK_FALSE(duplicate.cols_distinct);
}

TEST_CASE("uncovered data leave the process non-interpolating") {
  const Eigen::VectorXd y = testing::vec({1.0, 2.0, 3.0});
  const auto lp = build(testing::mask_from_rows({{1, 0}, {0, 1}, {0, 0}}, {1, 1}, y), y);
  CHECK_FALSE(lp.interpolating);
  CHECK(lp.stages.back().unfitted_data == std::vector<int>{2});
}

TEST_CASE("one neuron active on everything with constant labels") {
  const int n = 9;
  Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  std::vector<std::vector<int>> rows(n, std::vector<int>{1});
  const auto lp = build(testing::mask_from_rows(rows, {1}, y), y);
  CHECK(lp.stage_count() == 1);
  CHECK(pred_sq_norm(lp) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(opt_sq_norm(y) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(pred_sq_norm(lp) <= bias_bound(y));
}

TEST_CASE("bias bound formula") {
  CHECK(bias_bound(testing::vec({1.0, -2.0, 0.5, 0.0})) ==
        doctest::Approx(5.0 * (std::sqrt(2.0) + 1.0) * 2.0));
}

TEST_CASE("properties over random instances") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const int n = 2 + static_cast<int>(seed % 9);
    const int m = 1 + static_cast<int>(seed % 6);
    const auto lp = random_instance(seed, n, m);
    CAPTURE(seed);

    // jump times strictly increase
    for (int k = 1; k <= lp.stage_count(); ++k) CHECK(lp.jump_times[k] > lp.jump_times[k - 1]);
    // exponents stay in [-1, 0], the selected neuron sits at 0 after its jump
    for (const auto& st : lp.stages) {
      for (double l : st.exponents) {
        CHECK(l >= -1.0);
        CHECK(l <= 0.0);
      }
    }
    for (int k = 0; k < lp.stage_count(); ++k) {
      const int j = *lp.stages[k].selected;
      CHECK(exponent_at(lp, j, lp.jump_times[k + 1]) == 0.0);
      // continuity of the exponent across the jump for everyone else
      for (int q = 0; q < lp.m; ++q) {
        const double before = std::min(0.0, lp.stages[k].exponents[q] +
                                                (lp.jump_times[k + 1] - lp.jump_times[k]) * lp.stages[k].d_norms[q]);
        if (q != j) CHECK(exponent_at(lp, q, lp.jump_times[k + 1]) == doctest::Approx(before).epsilon(1e-12));
      }
    }
    // unfitted sets shrink; unfitted-neuron rates never increase
    for (int k = 1; k < static_cast<int>(lp.stages.size()); ++k) {
      CHECK(lp.stages[k].unfitted_data.size() < lp.stages[k - 1].unfitted_data.size());
      for (int j : lp.stages[k].unfitted_neurons) {
        CHECK(lp.stages[k].d_norms[j] <= lp.stages[k - 1].d_norms[j]);
      }
    }
    // norm accounting
    CHECK(pred_sq_norm(lp) == doctest::Approx(telescoped_sq_norm(lp)).epsilon(1e-12));
    CHECK(network_sq_norm(lp.final_params) == doctest::Approx(pred_sq_norm(lp)).epsilon(1e-12));
    double previous = 0.0;
    for (int k = 0; k <= lp.stage_count(); ++k) {
      const double v = network_sq_norm(theta_at(lp, lp.jump_times[k]));
      CHECK(v >= previous);
      previous = v;
    }
    if (lp.interpolating) {
      CHECK(opt_sq_norm(lp.labels) <= pred_sq_norm(lp) * (1.0 + 1e-12));
      const auto data = OrthonormalDataset::identity(lp.labels);
      CHECK((outputs(lp.final_params, data) - lp.labels).norm() <= 1e-12 * (1.0 + lp.labels.norm()));
    }
  }
}

TEST_CASE("stage_direction keeps the direction frozen after selection") {
  const auto lp = disjoint();
  const Eigen::VectorXd d1 = stage_direction(lp, 2, 1);
  CHECK(d1(1) == doctest::Approx(1.0));  // y_2 / n = 2 / 2
  CHECK(d1(0) == 0.0);
  CHECK(stage_direction(lp, 0, 0)(0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(stage_direction(lp, 5, 0), Error);
}

TEST_CASE("to_ambient maps data coordinates through the basis") {
  const auto data = generate_dataset(4, 6, LabelSpec::abs_gaussian(), Basis::RandomOrthonormal, 2);
  const auto init = sample_init(5, 6, -1.0, 11);
  const auto lp = build(mask_matrix(data, init), data.labels());
  const auto net = to_ambient(lp.final_params, data);
  CHECK(net.d() == 6);
  if (lp.interpolating) CHECK((outputs(net, data) - data.labels()).norm() <= 1e-12);
}
