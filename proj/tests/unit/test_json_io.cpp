#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "s2s/error.hpp"
#include "s2s/json_io.hpp"

using namespace s2s;

TEST_CASE("dataset JSON round trip") {
  const auto id = generate_dataset(3, 3, LabelSpec::gaussian(), Basis::Identity, 1);
  const Json j = dataset_to_json(id);
  CHECK(j["basis"] == "identity");
  const auto back = dataset_from_json(j);
  CHECK(back.is_identity());
  CHECK(back.labels() == id.labels());

  const auto rot = generate_dataset(3, 5, LabelSpec::gaussian(), Basis::RandomOrthonormal, 1);
  const auto back2 = dataset_from_json(dataset_to_json(rot));
  CHECK(back2.input_matrix() == rot.input_matrix());
  CHECK(back2.labels() == rot.labels());

  Json broken = j;
  broken["labels"] = Json::array({1.0});
  CHECK_THROWS_AS(dataset_from_json(broken), Error);
}

TEST_CASE("limit process JSON round trip") {
  const Eigen::VectorXd y = testing::vec({1.0, 2.0});
  const auto lp = build(testing::mask_from_rows({{1, 0}, {0, 1}}, {1, 1}, y), y);
  const Json j = limit_process_to_json(lp);
  CHECK(j["jump_times"][1] == 1.0);
  CHECK(j["jump_times"][2] == 2.0);
  CHECK(j["jump_times"][3].is_null());
  CHECK(j["stages"][0]["newly_fitted"] == Json::array({1}));
  const auto back = limit_process_from_json(Json::parse(j.dump()));
  CHECK(std::isinf(back.jump_times.back()));
  CHECK(back.stage_count() == 2);
  CHECK(*back.stages[1].selected == 0);
  CHECK(pred_sq_norm(back) == doctest::Approx(3.0));
  CHECK(limit_process_to_json(back) == j);
}

TEST_CASE("report JSON") {
  const Json j = report_to_json(make_report(3, 4, 0.5));
  CHECK(j["successes"] == 3);
  CHECK(j["theoretical_bound"] == 0.5);
  CHECK(report_to_json(make_report(3, 4, std::nullopt))["theoretical_bound"].is_null());
}
