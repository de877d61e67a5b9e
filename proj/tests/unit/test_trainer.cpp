#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "s2s/analysis.hpp"
#include "s2s/error.hpp"
#include "s2s/trainer.hpp"

using namespace s2s;

namespace {

TrainerConfig short_run(std::int64_t epochs, double lr = 0.05) {
  TrainerConfig c;
  c.lr = lr;
  c.max_epochs = epochs;
  c.record_every = 1;
  c.loss_stop = 0.0;
  return c;
}

}  // namespace

TEST_CASE("accelerated time conversion") {
  CHECK(accelerated_time(507000.0, 0.01, -500.0) == doctest::Approx(10.14).epsilon(1e-15));
  CHECK(epoch_at(10.14, 0.01, -500.0) == doctest::Approx(507000.0).epsilon(1e-15));
  CHECK_THROWS_AS(accelerated_time(1.0, 0.01, 0.0), Error);
}

TEST_CASE("renormalize preserves w and a") {
  ScaledNeuron n;
  n.v = testing::vec({3.0, 4.0});
  n.b = 0.2;
  n.c = -7.0;
  n.s = -1;
  const auto r = renormalize(n);
  CHECK(r.log_w_norm() == doctest::Approx(n.log_w_norm()).epsilon(1e-14));
  CHECK(r.log_a_abs() == doctest::Approx(n.log_a_abs()).epsilon(1e-14));
  CHECK(r.s == -1);
  CHECK(r.v.norm() * r.b == doctest::Approx(1.0));
  ScaledNeuron dead = n;
  dead.b = 0.0;
  CHECK_THROWS_AS(renormalize(dead), Error);
}

TEST_CASE("log-domain and dense descent agree at moderate scale") {
  const auto data = generate_dataset(6, 9, LabelSpec::gaussian(), Basis::RandomOrthonormal, 4);
  const auto init = sample_init(5, 9, -2.0, 8);
  const auto cfg = short_run(300);
  const auto scaled = train(data, init, cfg);
  const auto dense = train_dense(data, dense_from_init(init), cfg, init.alpha_log);
  CHECK((scaled.final_network.a - dense.final_network.a).norm() <= 1e-10 * dense.final_network.a.norm());
  CHECK((scaled.final_network.W - dense.final_network.W).norm() <= 1e-10 * dense.final_network.W.norm());
  REQUIRE(scaled.samples.size() == dense.samples.size());
  for (std::size_t k = 0; k < scaled.samples.size(); ++k) {
    CHECK(scaled.samples[k].loss == doctest::Approx(dense.samples[k].loss).epsilon(1e-10));
  }
}

TEST_CASE("gd_step matches one step of the trainer") {
  const auto data = generate_dataset(5, 5, LabelSpec::abs_gaussian(), Basis::Identity, 1);
  const auto init = sample_init(3, 5, -1.0, 2);
  auto state = scaled_from_init(init);
  gd_step(state, data, 0.1);
  const auto traj = train(data, init, short_run(1, 0.1));
  const auto net = materialize(state);
  CHECK((net.W - traj.final_network.W).norm() <= 1e-15);
  CHECK((net.a - traj.final_network.a).norm() <= 1e-15);
}

TEST_CASE("zero epoch budget records a single sample") {
  const auto data = generate_dataset(4, 4, LabelSpec::abs_gaussian(), Basis::Identity, 1);
  const auto traj = train(data, sample_init(2, 4, -500.0, 1), short_run(0));
  CHECK(traj.samples.size() == 1);
  CHECK(traj.epochs_run == 0);
  CHECK(traj.outcome == Outcome::Budget);
  // outputs underflow to exactly zero at this scale
  CHECK(traj.final_loss == doctest::Approx(data.labels().squaredNorm() / 8.0).epsilon(1e-15));
}

TEST_CASE("tiny initialization: balancedness is preserved and the loss never increases") {
  const auto data = generate_dataset(8, 8, LabelSpec::abs_gaussian(), Basis::Identity, 3);
  TrainerConfig cfg;
  cfg.lr = 0.05;
  cfg.max_epochs = 20000;
  cfg.record_every = 50;
  cfg.loss_stop = 1e-20;
  const auto traj = train(data, sample_init(4, 8, -60.0, 3), cfg);
  CHECK(traj.max_step_loss_increase <= 1e-9);
  // Gradient descent conserves a^2 - ||w||^2 only up to O(lr^2) per step.
  double worst = 0.0;
  for (const auto& s : traj.samples) {
    for (std::size_t j = 0; j < s.log_w_norm.size(); ++j) {
      worst = std::max(worst, std::tanh(std::abs(s.log_a_abs[j] - s.log_w_norm[j])));
    }
  }
  CHECK(worst < 1e-2);
  cfg.lr = 0.0125;
  cfg.max_epochs = 80000;
  cfg.record_every = 200;
  const auto fine = train(data, sample_init(4, 8, -60.0, 3), cfg);
  double fine_worst = 0.0;
  for (const auto& s : fine.samples) {
    for (std::size_t j = 0; j < s.log_w_norm.size(); ++j) {
      fine_worst = std::max(fine_worst, std::tanh(std::abs(s.log_a_abs[j] - s.log_w_norm[j])));
    }
  }
  CHECK(fine_worst < worst / 2.0);
}

TEST_CASE("fit events are recorded exactly and agree with the sampled residuals") {
  const auto data = OrthonormalDataset::identity(testing::vec({1.0, 2.0}));
  Eigen::MatrixXd dirs(2, 2);
  dirs << 1.0, -1.0, -1.0, 1.0;
  TrainerConfig cfg;
  cfg.lr = 0.01;
  cfg.record_every = 100;
  const auto traj = train(data, make_init({1, 1}, dirs, -100.0), cfg);
  REQUIRE(traj.fit_epochs[0].has_value());
  REQUIRE(traj.fit_epochs[1].has_value());
  CHECK(*traj.fit_epochs[1] < *traj.fit_epochs[0]);
  CHECK(fit_events(traj, 0.5) == traj.fit_epochs);
  CHECK(traj.outcome == Outcome::Converged);
  CHECK(traj.final_loss < 1e-20);
}

TEST_CASE("trajectory CSV round trip") {
  const auto data = generate_dataset(3, 3, LabelSpec::abs_gaussian(), Basis::Identity, 2);
  auto cfg = short_run(25);
  cfg.record_every = 5;
  const auto traj = train(data, sample_init(2, 3, -4.0, 2), cfg);
  std::stringstream ss;
  write_trajectory_csv(traj, ss, true);
  const std::string text = ss.str();
  CHECK(text.rfind("epoch,t,loss,lnw_1,lnw_2,lna_1,lna_2,r_1,r_2,r_3\n", 0) == 0);
  const auto back = read_trajectory_csv(ss, 2, 3);
  REQUIRE(back.samples.size() == traj.samples.size());
  for (std::size_t k = 0; k < back.samples.size(); ++k) {
    CHECK(back.samples[k].epoch == traj.samples[k].epoch);
    CHECK(back.samples[k].loss == traj.samples[k].loss);
    CHECK(back.samples[k].log_w_norm == traj.samples[k].log_w_norm);
    CHECK(back.samples[k].log_a_abs == traj.samples[k].log_a_abs);
    CHECK(back.samples[k].residuals == traj.samples[k].residuals);
  }
  std::stringstream bad("epoch,t\n1,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad, 2, 3), Error);
}

TEST_CASE("he-uniform draw ranges") {
  const auto net = he_uniform_init(50, 20, 3);
  CHECK(net.W.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(20.0));
  CHECK(net.a.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(50.0));
  CHECK(net.W.cwiseAbs().maxCoeff() > 0.5 / std::sqrt(20.0));
}

TEST_CASE("trainer configuration validation") {
  TrainerConfig c;
  c.lr = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.fit_threshold = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.record_every = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.band = {1.5, 2.0};
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("gradient diagnostics at initialization") {
  const auto data = OrthonormalDataset::identity(testing::vec({1.0, 2.0}));
  Eigen::MatrixXd dirs(2, 2);
  dirs << 1.0, -1.0, -1.0, 1.0;
  const auto init = make_init({1, 1}, dirs, -5.0);
  const auto diag = gradient_diagnostics(dense_from_init(init), data, std::vector<int>{});
  CHECK(diag.fitted_error.norm() == 0.0);
  // near zero output the dynamical direction is D_j: y_i / n on the active data
  CHECK(diag.dynamical[0](0) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(diag.dynamical[1](1) == doctest::Approx(1.0).epsilon(1e-3));
}
