#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "s2s/analysis.hpp"
#include "s2s/error.hpp"

using namespace s2s;

namespace {

using Fits = std::vector<std::optional<std::int64_t>>;

LimitProcess disjoint() {
  const Eigen::VectorXd y = testing::vec({1.0, 2.0});
  return build(testing::mask_from_rows({{1, 0}, {0, 1}}, {1, 1}, y), y);
}

// A trajectory whose log-norms follow the limit exponents exactly:
// ln||w_j|| = alpha_log * (-l_j(t)) at every recorded epoch.
Trajectory synthetic(const LimitProcess& lp, double lr, double alpha_log, std::int64_t epochs, std::int64_t every) {
  Trajectory traj;
  traj.lr = lr;
  traj.alpha_log = alpha_log;
  traj.labels = lp.labels;
  traj.fit_epochs.assign(lp.n, std::nullopt);
  for (int k = 0; k < lp.stage_count(); ++k) {
    const auto epoch = static_cast<std::int64_t>(std::llround(epoch_at(lp.jump_times[k + 1], lr, alpha_log)));
    for (int i : lp.stages[k].newly_fitted) traj.fit_epochs[i] = epoch;
  }
  for (std::int64_t e = 0; e <= epochs; e += every) {
    TrajectorySample s;
    s.epoch = e;
    s.t = accelerated_time(double(e), lr, alpha_log);
    for (int j = 0; j < lp.m; ++j) {
      s.log_w_norm.push_back(-alpha_log * exponent_at(lp, j, s.t));
      s.log_a_abs.push_back(s.log_w_norm.back());
    }
    traj.samples.push_back(std::move(s));
  }
  return traj;
}

}  // namespace

TEST_CASE("detect_jumps clusters by relative gap") {
  const Fits fits{507000, 507012, 790000};
  const auto clusters = detect_jumps(fits, std::nullopt);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].epoch == 507000);
  CHECK(clusters[0].data == std::vector<int>{0, 1});
  CHECK(clusters[1].data == std::vector<int>{2});
  CHECK(detect_jumps(Fits{std::nullopt, std::nullopt}, std::nullopt).empty());
  try {
    detect_jumps(fits, 3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ClusterMismatch);
  }
}

TEST_CASE("compare_jumps and segment_slopes on a trajectory synthesized from the limit") {
  const auto lp = disjoint();
  const double lr = 0.01;
  const double alpha_log = -100.0;  // jump epochs 10000 and 20000
  const auto traj = synthetic(lp, lr, alpha_log, 30000, 100);
  const auto cmp = compare_jumps(traj, lp, lr, alpha_log);
  REQUIRE(cmp.stages.size() == 2);
  CHECK(cmp.max_relative_error == 0.0);
  CHECK(cmp.all_sets_match);

  const auto slopes = segment_slopes(traj, lp, lr, alpha_log);
  for (const auto& e : slopes.entries) {
    CAPTURE(e.neuron);
    CAPTURE(e.stage);
    CHECK_FALSE(e.skipped);
    CHECK(e.fitted_slope == doctest::Approx(e.predicted_slope).epsilon(1e-9).scale(1e-12));
  }
  CHECK(slopes.max_relative_error < 1e-9);
  // neuron 0 grows at ||D_0^(0)|| = 1/2 on stage 0, then stays the same on stage 1
  CHECK(slopes.entries[0].predicted_slope == doctest::Approx(lr * 0.5));
}

TEST_CASE("segment_slopes needs samples") {
  const auto lp = disjoint();
  Trajectory empty;
  empty.labels = lp.labels;
  try {
    segment_slopes(empty, lp, 0.01, -100.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewSamples);
  }
}

TEST_CASE("ols and loglog_slope") {
  std::vector<ScalingPoint> sqrt_points;
  std::vector<ScalingPoint> flat;
  for (double n : {8.0, 16.0, 32.0, 64.0}) {
    sqrt_points.push_back({n, std::sqrt(n)});
    flat.push_back({n, 3.0});
  }
  const auto fit = loglog_slope(sqrt_points);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(loglog_slope(flat).slope == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(loglog_slope(std::vector<ScalingPoint>{{1.0, 1.0}, {2.0, 2.0}}), Error);
  CHECK_THROWS_AS(loglog_slope(std::vector<ScalingPoint>{{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}), Error);
  const std::vector<double> x{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(ols(x, x), Error);
}

TEST_CASE("network_sq_norm") {
  CHECK(network_sq_norm(DenseNetwork::zeros(3, 4)) == 0.0);
  CHECK(network_sq_norm(disjoint().final_params) == doctest::Approx(3.0).epsilon(1e-12));
  const auto net = dense_from_init(sample_init(5, 7, -0.5, 1));
  CHECK(network_sq_norm(net) == doctest::Approx(net.a.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("alignment with the predicted directions") {
  const auto lp = disjoint();
  const auto data = OrthonormalDataset::identity(lp.labels);
  DenseNetwork net = DenseNetwork::zeros(2, 2);
  net.a << 1.0, 1.0;
  net.W << 3.0, 0.0, 0.0, 1.0;  // both exactly along D_j^(0)
  auto cos = alignment(net, lp, 0, data);
  CHECK(*cos[0] == doctest::Approx(1.0));
  CHECK(*cos[1] == doctest::Approx(1.0));
  net.W << 0.0, 1.0, 1.0, 0.0;  // orthogonal
  cos = alignment(net, lp, 0, data);
  CHECK(*cos[0] == doctest::Approx(0.0));
  net.W.row(0).setZero();
  cos = alignment(net, lp, 0, data);
  CHECK_FALSE(cos[0].has_value());
}
