#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2s/core_model.hpp"
#include "s2s/limit_process.hpp"
#include "s2s/trainer.hpp"

namespace s2s::cli {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct DatasetSpec {
  int n = 64;
  int d = 64;
  std::string basis = "identity";  // identity | random
  LabelSpec labels = LabelSpec::abs_gaussian();
  std::uint64_t seed = 0;
};

struct InitSpec {
  std::string mode = "balanced";  // balanced | explicit | he-uniform
  int m = 6;
  double alpha_log = -500.0;
  std::string scale_rule = "fixed";  // fixed | per-width: alpha = alpha_base / sqrt(m)
  std::uint64_t seed = 0;
  std::vector<int> signs;                      // explicit mode
  std::vector<std::vector<double>> directions;  // explicit mode, m rows of length d

  // alpha_log after the scale rule has been applied for width m.
  double effective_alpha_log(int width) const;
};

struct TrainSpec {
  std::string path = "auto";  // auto | log | dense
  double lr = 0.01;
  std::int64_t max_epochs = 10'000'000;
  double loss_stop = 1e-20;
  std::int64_t record_every = 500;
  double fit_threshold = 0.5;
  double renorm_low = 0.5;
  double renorm_high = 2.0;
  bool record_residuals = true;

  TrainerConfig trainer_config() const;
};

struct BuildSpec {
  bool strict = false;
  double tie_tolerance = 1e-12;
};

struct AnalysisSpec {
  bool assert_tolerances = false;
  double jump_window = 0.01;
  double slope_margin = 0.2;
  int min_samples = 10;
  double jump_tolerance = 0.05;
  double slope_tolerance = 0.05;
  double norm_tolerance = 0.01;
  std::string limit_file;       // compare: reuse instead of building in-run
  std::string trajectory_file;  // compare: reuse instead of training in-run
};

struct SweepSpec {
  std::vector<int> n_values{8, 16, 32, 64, 128, 256};
  std::vector<int> m_values{8, 16, 32, 64};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string width_rule = "fixed";  // fixed | log10000: m = ceil(ln(10000 n) / ln(4/3))
  std::string engine = "limit";      // limit | train
  std::vector<std::string> inits{"balanced", "he-uniform"};  // sweep-m
  double he_lr = 0.001;
};

struct VerifySpec {
  std::vector<int> n_half{8, 16, 32, 64};
  std::vector<int> m_values{10, 20, 30};
  int n_plus = 32;
  int n_minus = 32;
  int m = 20;
  std::int64_t trials = 10'000;
  std::uint64_t seed = 0;
  int n = 4096;
  double delta = 0.025;
  double rho = 0.25;
  std::string ordering = "fixed";  // fixed | algorithmic
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string name = "custom";
  std::string output_dir;  // empty: S2S_OUT_DIR, then ./s2s-out
  DatasetSpec dataset;
  InitSpec init;
  TrainSpec train;
  BuildSpec build;
  AnalysisSpec analysis;
  SweepSpec sweep;
  VerifySpec verify;
};

Json to_json(const RunConfig& config);
// Rejects unknown keys and wrong types with ErrorCode::Config.
RunConfig from_json(const Json& j);

// Applies "a.b.c=value" to a fully populated config document. The value is
// parsed as JSON when possible and taken as a string otherwise.
void apply_override(Json& doc, const std::string& assignment);

std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

// m = ceil(ln(10000 n) / ln(4/3))
int width_rule_log10000(int n);

OrthonormalDataset make_dataset(const DatasetSpec& spec);
InitDraw make_init_draw(const InitSpec& spec, int m, int d);
BuildOptions build_options(const BuildSpec& spec);

}  // namespace s2s::cli
