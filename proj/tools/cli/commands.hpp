#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "config.hpp"
#include "s2s/error.hpp"
#include "s2s/analysis.hpp"
#include "s2s/limit_process.hpp"
#include "s2s/trainer.hpp"

namespace s2s::cli {

// Exit statuses: 0 success, 1 an enabled assertion failed, 2 usage or
// configuration error, 10 + ErrorCode for library errors.
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitUsage = 2;
int exit_code(ErrorCode code) noexcept;

struct Context {
  RunConfig config;
  std::filesystem::path out_dir;
  std::ostream& human;
};

struct CompareResult {
  LimitProcess lp;
  Trajectory traj;
  JumpComparison jumps;
  SlopeReport slopes;
  double trained_sq_norm = 0.0;
  double norm_relative_error = 0.0;
  bool slopes_nonincreasing = true;
  double max_frozen_slope = 0.0;  // |slope| of neurons whose predicted slope is 0
  bool passed = true;
};

int cmd_limit(const Context& ctx);
int cmd_train(const Context& ctx);
int cmd_compare(const Context& ctx);
int cmd_sweep_n(const Context& ctx);
int cmd_sweep_m(const Context& ctx);
int cmd_verify_assumptions(const Context& ctx);
int cmd_verify_split(const Context& ctx);
int cmd_verify_bias(const Context& ctx);
int cmd_figures(const Context& ctx);

// Shared by compare and figures. Snapshots are taken at the midpoint of every
// finite inter-jump window when `snapshots` is set.
CompareResult run_compare(const RunConfig& config, bool snapshots);

// Norm 1/2 sum (a_j^2 + ||w_j||^2) from the log-norms of a trajectory sample.
double sample_sq_norm(const TrajectorySample& sample);

// Decimal text for CSV/JSON-adjacent output; '.' separator, shortest round-trip form.
std::string format_number(double x);

}  // namespace s2s::cli
