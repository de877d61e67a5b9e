#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "s2s/error.hpp"
#include "s2s/json_io.hpp"
#include "s2s/random.hpp"
#include "s2s/stochastic.hpp"

namespace s2s::cli {

namespace fs = std::filesystem;

int exit_code(ErrorCode code) noexcept { return 10 + static_cast<int>(code); }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double sample_sq_norm(const TrajectorySample& sample) {
  double total = 0.0;
  for (std::size_t j = 0; j < sample.log_w_norm.size(); ++j) {
    total += 0.5 * (std::exp(2.0 * sample.log_a_abs[j]) + std::exp(2.0 * sample.log_w_norm[j]));
  }
  return total;
}

namespace {

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> header) {
    bool first = true;
    for (const auto& h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double x) { return format_number(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(std::int64_t x) { return std::to_string(x); }
  static std::string cell(std::uint64_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "1" : "0"; }
  static std::string cell(const std::string& x) { return x; }

  std::ostringstream out_;
};

struct Prepared {
  OrthonormalDataset data;
  InitDraw init;
};

Prepared prepare(const RunConfig& c) {
  OrthonormalDataset data = make_dataset(c.dataset);
  InitDraw init = make_init_draw(c.init, c.init.m, data.d());
  return {std::move(data), std::move(init)};
}

LimitProcess build_limit(const OrthonormalDataset& data, const InitDraw& init, const BuildSpec& spec) {
  return build(mask_matrix(data, init), data.labels(), build_options(spec));
}

bool uses_dense_path(const RunConfig& c) {
  if (c.init.mode == "he-uniform") {
    if (c.train.path == "log") throw Error(ErrorCode::Config, "he-uniform init requires the dense path");
    return true;
  }
  return c.train.path == "dense";
}

Trajectory run_training(const RunConfig& c, const OrthonormalDataset& data, TrainerConfig tc) {
  const bool dense = uses_dense_path(c);
  if (c.init.mode == "he-uniform") {
    return train_dense(data, he_uniform_init(c.init.m, data.d(), c.init.seed), tc);
  }
  const InitDraw init = make_init_draw(c.init, c.init.m, data.d());
  if (dense) return train_dense(data, dense_from_init(init), tc, init.alpha_log);
  return train(data, init, tc);
}

void print_limit_summary(const LimitProcess& lp, std::ostream& os) {
  os << "  k  t_k            neuron  fitted\n";
  for (int k = 1; k <= lp.stage_count(); ++k) {
    char line[128];
    std::snprintf(line, sizeof line, "%3d  %-13.6f  %6d  %6zu\n", k, lp.jump_times[k], *lp.stages[k - 1].selected,
                  lp.stages[k - 1].newly_fitted.size());
    os << line;
  }
  os << "pred_sq_norm  " << fmt("%.6f", pred_sq_norm(lp)) << "\n"
     << "opt_sq_norm   " << fmt("%.6f", opt_sq_norm(lp.labels)) << "\n"
     << "bias_bound    " << fmt("%.6f", bias_bound(lp.labels)) << "\n"
     << "assumptions   " << (lp.assumption_report.passed() ? "hold" : "violated") << "\n"
     << "interpolating " << (lp.interpolating ? "yes" : "no") << "\n";
}

Json fit_epochs_json(const std::vector<std::optional<std::int64_t>>& fits) {
  Json out = Json::array();
  for (const auto& f : fits) out.push_back(f ? Json(*f) : Json(nullptr));
  return out;
}

Json final_json(const Trajectory& traj) {
  Json j;
  j["outcome"] = traj.outcome == Outcome::Converged ? "converged" : "budget";
  j["epochs_run"] = traj.epochs_run;
  j["final_loss"] = traj.final_loss;
  j["max_step_loss_increase"] = traj.max_step_loss_increase;
  j["network_sq_norm"] = traj.final_state.empty()
                             ? network_sq_norm(traj.final_network)
                             : network_sq_norm(std::span<const ScaledNeuron>(traj.final_state));
  j["fit_epochs"] = fit_epochs_json(traj.fit_epochs);
  j["log_w_norm"] = traj.samples.back().log_w_norm;
  j["log_a_abs"] = traj.samples.back().log_a_abs;
  return j;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) { return derive_seed(derive_seed(seed, a), b); }

}  // namespace

int cmd_limit(const Context& ctx) {
  const auto& c = ctx.config;
  const Prepared p = prepare(c);
  const LimitProcess lp = build_limit(p.data, p.init, c.build);
  write_json(ctx.out_dir / "limit.json", limit_process_to_json(lp));
  print_limit_summary(lp, ctx.human);
  return 0;
}

int cmd_train(const Context& ctx) {
  const auto& c = ctx.config;
  const OrthonormalDataset data = make_dataset(c.dataset);
  const Trajectory traj = run_training(c, data, c.train.trainer_config());
  std::ostringstream csv;
  write_trajectory_csv(traj, csv, c.train.record_residuals);
  write_text(ctx.out_dir / "trajectory.csv", csv.str());
  write_json(ctx.out_dir / "final.json", final_json(traj));
  ctx.human << "epochs     " << traj.epochs_run << "\n"
            << "final_loss " << fmt("%.3e", traj.final_loss) << "\n"
            << "outcome    " << (traj.outcome == Outcome::Converged ? "converged" : "budget") << "\n";
  return 0;
}

CompareResult run_compare(const RunConfig& c, bool snapshots) {
  if (c.init.mode == "he-uniform") throw Error(ErrorCode::Config, "compare needs a balanced small initialization");
  CompareResult r;
  const OrthonormalDataset data = make_dataset(c.dataset);
  const double alpha_log = c.init.effective_alpha_log(c.init.m);

  if (!c.analysis.limit_file.empty()) {
    r.lp = limit_process_from_json(read_json(c.analysis.limit_file));
  } else {
    r.lp = build_limit(data, make_init_draw(c.init, c.init.m, data.d()), c.build);
  }

  if (!c.analysis.trajectory_file.empty()) {
    std::ifstream in(c.analysis.trajectory_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + c.analysis.trajectory_file);
    r.traj = read_trajectory_csv(in, r.lp.m, r.lp.n);
    r.traj.lr = c.train.lr;
    r.traj.alpha_log = alpha_log;
    r.traj.labels = r.lp.labels;
    r.traj.fit_threshold = c.train.fit_threshold;
    r.traj.fit_epochs = fit_events(r.traj, c.train.fit_threshold);
  } else {
    TrainerConfig tc = c.train.trainer_config();
    if (snapshots) {
      for (int k = 0; k < r.lp.stage_count(); ++k) {
        const double mid = 0.5 * (r.lp.jump_times[k] + r.lp.jump_times[k + 1]);
        tc.snapshot_epochs.push_back(static_cast<std::int64_t>(std::llround(epoch_at(mid, tc.lr, alpha_log))));
      }
    }
    r.traj = run_training(c, data, tc);
  }
  if (r.traj.samples.empty()) throw Error(ErrorCode::TooFewSamples, "trajectory has no samples");

  r.jumps = compare_jumps(r.traj, r.lp, c.train.lr, alpha_log, c.analysis.jump_window);
  r.slopes = segment_slopes(r.traj, r.lp, c.train.lr, alpha_log, {c.analysis.slope_margin, c.analysis.min_samples});

  double max_predicted = 0.0;
  for (const auto& e : r.slopes.entries) max_predicted = std::max(max_predicted, e.predicted_slope);
  for (const auto& e : r.slopes.entries) {
    if (!e.skipped && e.predicted_slope == 0.0) r.max_frozen_slope = std::max(r.max_frozen_slope, std::abs(e.fitted_slope));
  }
  // Consecutive measured stages of a neuron that is unfitted in both.
  std::map<int, const SlopeEntry*> last;
  for (const auto& e : r.slopes.entries) {
    if (e.skipped || e.fitted || e.predicted_slope == 0.0) continue;
    auto it = last.find(e.neuron);
    if (it != last.end() && it->second->stage == e.stage - 1 &&
        e.fitted_slope > it->second->fitted_slope * (1.0 + c.analysis.slope_tolerance)) {
      r.slopes_nonincreasing = false;
    }
    last[e.neuron] = &e;
  }

  r.trained_sq_norm = sample_sq_norm(r.traj.samples.back());
  const double predicted = pred_sq_norm(r.lp);
  r.norm_relative_error = std::abs(r.trained_sq_norm - predicted) / predicted;

  r.passed = r.jumps.max_relative_error < c.analysis.jump_tolerance && r.jumps.all_sets_match &&
             r.slopes.max_relative_error < c.analysis.slope_tolerance && r.slopes_nonincreasing &&
             r.max_frozen_slope <= c.analysis.slope_tolerance * max_predicted &&
             r.norm_relative_error < c.analysis.norm_tolerance && r.traj.final_loss < c.train.loss_stop;
  return r;
}

namespace {

Json compare_json(const CompareResult& r) {
  Json j;
  j["jumps"] = comparison_to_json(r.jumps);
  j["slopes"] = slopes_to_json(r.slopes);
  j["slopes_nonincreasing"] = r.slopes_nonincreasing;
  j["max_frozen_slope"] = r.max_frozen_slope;
  j["norm"] = {{"trained", r.trained_sq_norm},
               {"predicted", pred_sq_norm(r.lp)},
               {"relative_error", r.norm_relative_error}};
  j["final_loss"] = r.traj.final_loss;
  j["passed"] = r.passed;
  return j;
}

void print_compare(const CompareResult& r, std::ostream& os) {
  os << "  k  predicted      observed       rel.err   sets\n";
  for (const auto& s : r.jumps.stages) {
    char line[128];
    std::snprintf(line, sizeof line, "%3d  %-13.6f  %-13.6f  %-8.2e  %s\n", s.k, s.predicted, s.observed,
                  s.relative_error, s.sets_match ? "match" : "differ");
    os << line;
  }
  os << "max slope rel.err  " << fmt("%.3e", r.slopes.max_relative_error) << "\n"
     << "norm rel.err       " << fmt("%.3e", r.norm_relative_error) << "\n"
     << "final loss         " << fmt("%.3e", r.traj.final_loss) << "\n"
     << "tolerances         " << (r.passed ? "met" : "NOT met") << "\n";
}

}  // namespace

int cmd_compare(const Context& ctx) {
  const CompareResult r = run_compare(ctx.config, false);
  write_json(ctx.out_dir / "comparison.json", compare_json(r));
  if (ctx.config.analysis.trajectory_file.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(r.traj, csv, ctx.config.train.record_residuals);
    write_text(ctx.out_dir / "trajectory.csv", csv.str());
  }
  if (ctx.config.analysis.limit_file.empty()) write_json(ctx.out_dir / "limit.json", limit_process_to_json(r.lp));
  print_compare(r, ctx.human);
  return ctx.config.analysis.assert_tolerances && !r.passed ? kExitAssertion : 0;
}

namespace {

struct SweepNRow {
  int n = 0;
  std::uint64_t seed = 0;
  int m = 0;
  double pred = 0.0;
  double opt = 0.0;
  double bound = 0.0;
  bool interpolating = false;
  int stages = 0;
};

}  // namespace

int cmd_sweep_n(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.dataset.labels.kind == LabelKind::Explicit) throw Error(ErrorCode::Config, "sweep-n needs random labels");
  std::vector<SweepNRow> rows;
  for (int n : c.sweep.n_values) {
    for (auto seed : c.sweep.seeds) {
      rows.push_back({n, seed, c.sweep.width_rule == "log10000" ? width_rule_log10000(n) : c.init.m});
    }
  }
  parallel_for(rows.size(), [&](std::size_t i) {
    SweepNRow& row = rows[i];
    const OrthonormalDataset data = generate_dataset(row.n, row.n, c.dataset.labels, Basis::Identity, row.seed);
    const InitDraw init = sample_init(row.m, row.n, c.init.effective_alpha_log(row.m), row.seed);
    const LimitProcess lp = build(mask_matrix(data, init), data.labels());
    row.opt = opt_sq_norm(data.labels());
    row.bound = bias_bound(data.labels());
    row.stages = lp.stage_count();
    if (c.sweep.engine == "limit") {
      row.pred = pred_sq_norm(lp);
      row.interpolating = lp.interpolating;
    } else {
      TrainerConfig tc = c.train.trainer_config();
      tc.record_residuals = false;
      const Trajectory traj = train(data, init, tc);
      row.pred = network_sq_norm(std::span<const ScaledNeuron>(traj.final_state));
      row.interpolating = traj.outcome == Outcome::Converged;
    }
  });

  Csv csv({"n", "seed", "m", "sq_norm", "opt_sq_norm", "bias_bound", "interpolating", "stages"});
  for (const auto& r : rows) csv.row(r.n, r.seed, r.m, r.pred, r.opt, r.bound, r.interpolating, r.stages);
  write_text(ctx.out_dir / "sweep_n.csv", csv.str());

  std::vector<ScalingPoint> pred_points;
  std::vector<ScalingPoint> opt_points;
  Json points = Json::array();
  bool ratio_ok = true;
  int excluded = 0;
  for (int n : c.sweep.n_values) {
    double pred = 0.0;
    double opt = 0.0;
    double bound = 0.0;
    int count = 0;
    for (const auto& r : rows) {
      if (r.n != n) continue;
      if (!r.interpolating) {
        ++excluded;
        continue;
      }
      pred += r.pred;
      opt += r.opt;
      bound += r.bound;
      ratio_ok = ratio_ok && r.pred / r.opt <= r.bound / r.opt;
      ++count;
    }
    if (count == 0) continue;
    pred /= count;
    opt /= count;
    bound /= count;
    pred_points.push_back({double(n), pred});
    opt_points.push_back({double(n), opt});
    points.push_back({{"n", n}, {"runs", count}, {"mean_sq_norm", pred}, {"mean_opt_sq_norm", opt},
                      {"mean_bias_bound", bound}});
  }
  Json summary{{"points", points}, {"excluded", excluded}, {"ratio_within_bias_bound", ratio_ok}};
  if (pred_points.size() >= 3) {
    const LinearFit fp = loglog_slope(pred_points);
    const LinearFit fo = loglog_slope(opt_points);
    summary["sq_norm_slope"] = {{"slope", fp.slope}, {"intercept", fp.intercept}, {"r2", fp.r2}};
    summary["opt_slope"] = {{"slope", fo.slope}, {"intercept", fo.intercept}, {"r2", fo.r2}};
    ctx.human << "log-log slope of sq_norm " << fmt("%.4f", fp.slope) << "\n"
              << "log-log slope of opt     " << fmt("%.4f", fo.slope) << "\n";
  }
  write_json(ctx.out_dir / "sweep_n.json", summary);
  ctx.human << "ratio within bias bound  " << (ratio_ok ? "yes" : "no") << "\n";
  return c.analysis.assert_tolerances && !ratio_ok ? kExitAssertion : 0;
}

namespace {

struct SweepMRow {
  int m = 0;
  std::string init;
  std::uint64_t seed = 0;
  double sq_norm = 0.0;
  double loss = 0.0;
  std::int64_t epochs = 0;
  bool converged = false;
  double opt = 0.0;
};

}  // namespace

int cmd_sweep_m(const Context& ctx) {
  const auto& c = ctx.config;
  std::vector<SweepMRow> rows;
  for (int m : c.sweep.m_values) {
    for (const auto& mode : c.sweep.inits) {
      for (auto seed : c.sweep.seeds) rows.push_back({m, mode, seed});
    }
  }
  parallel_for(rows.size(), [&](std::size_t i) {
    SweepMRow& row = rows[i];
    DatasetSpec ds = c.dataset;
    ds.seed = row.seed;
    const OrthonormalDataset data = make_dataset(ds);
    TrainerConfig tc = c.train.trainer_config();
    tc.record_residuals = false;
    Trajectory traj;
    if (row.init == "he-uniform") {
      tc.lr = c.sweep.he_lr;
      traj = train_dense(data, he_uniform_init(row.m, data.d(), row.seed), tc);
    } else {
      const InitDraw init = sample_init(row.m, data.d(), c.init.effective_alpha_log(row.m), row.seed);
      traj = train_dense(data, dense_from_init(init), tc, init.alpha_log);
    }
    row.sq_norm = network_sq_norm(traj.final_network);
    row.loss = traj.final_loss;
    row.epochs = traj.epochs_run;
    row.converged = traj.outcome == Outcome::Converged;
    row.opt = opt_sq_norm(data.labels());
  });

  Csv csv({"m", "init", "seed", "sq_norm", "final_loss", "epochs", "converged", "opt_sq_norm"});
  for (const auto& r : rows) csv.row(r.m, r.init, r.seed, r.sq_norm, r.loss, r.epochs, r.converged, r.opt);
  write_text(ctx.out_dir / "sweep_m.csv", csv.str());

  std::map<std::string, std::vector<double>> means;
  Json points = Json::array();
  for (int m : c.sweep.m_values) {
    for (const auto& mode : c.sweep.inits) {
      double total = 0.0;
      int count = 0;
      for (const auto& r : rows) {
        if (r.m == m && r.init == mode) {
          total += r.sq_norm;
          ++count;
        }
      }
      means[mode].push_back(total / count);
      points.push_back({{"m", m}, {"init", mode}, {"mean_sq_norm", total / count}});
    }
  }
  Json summary{{"points", points}};
  bool ok = true;
  if (means.count("balanced")) {
    const auto& small = means["balanced"];
    bool nonincreasing = true;
    for (std::size_t k = 1; k < small.size(); ++k) nonincreasing = nonincreasing && small[k] <= small[k - 1];
    summary["small_init_nonincreasing"] = nonincreasing;
    ok = ok && nonincreasing;
    if (means.count("he-uniform")) {
      bool exceeds = true;
      bool increasing = true;
      const auto& he = means["he-uniform"];
      for (std::size_t k = 0; k < he.size(); ++k) {
        exceeds = exceeds && he[k] > small[k];
        if (k > 0) increasing = increasing && he[k] > he[k - 1];
      }
      summary["he_exceeds_small_init"] = exceeds;
      summary["he_increasing"] = increasing;
      ok = ok && exceeds;
    }
  }
  write_json(ctx.out_dir / "sweep_m.json", summary);
  for (const auto& [mode, values] : means) {
    ctx.human << mode << ":";
    for (double v : values) ctx.human << " " << fmt("%.4f", v);
    ctx.human << "\n";
  }
  return c.analysis.assert_tolerances && !ok ? kExitAssertion : 0;
}

int cmd_verify_assumptions(const Context& ctx) {
  const auto& v = ctx.config.verify;
  const McReport main = mc_assumption(v.n_plus, v.n_minus, v.m, v.trials, v.seed);
  Csv csv({"n_plus", "n_minus", "m", "trials", "successes", "empirical_p", "ci95_halfwidth", "bound", "vacuous",
           "within_3ci"});
  Json grid = Json::array();
  bool all_within = true;
  std::uint64_t index = 0;
  for (int h : v.n_half) {
    for (int m : v.m_values) {
      const McReport r = mc_assumption(h, h, m, v.trials, mix(v.seed, 1, index++));
      const double bound = *r.theoretical_bound;
      const bool within = r.empirical_p >= bound - 3.0 * r.ci95_halfwidth;
      all_within = all_within && within;
      csv.row(h, h, m, r.trials, r.successes, r.empirical_p, r.ci95_halfwidth, bound, r.vacuous, within);
      Json row = report_to_json(r);
      row["n_plus"] = h;
      row["n_minus"] = h;
      row["m"] = m;
      grid.push_back(row);
    }
  }
  write_text(ctx.out_dir / "assumption_grid.csv", csv.str());
  Json out = report_to_json(main);
  out["n_plus"] = v.n_plus;
  out["n_minus"] = v.n_minus;
  out["m"] = v.m;
  out["grid"] = grid;
  write_json(ctx.out_dir / "mc_report.json", out);
  ctx.human << "empirical_p " << fmt("%.4f", main.empirical_p) << " +- " << fmt("%.4f", main.ci95_halfwidth)
            << "  bound " << fmt("%.4f", *main.theoretical_bound) << (main.vacuous ? " (vacuous)" : "") << "\n"
            << "grid rows within 3 ci: " << (all_within ? "all" : "not all") << "\n";
  const bool ok = main.passed && all_within;
  return ctx.config.analysis.assert_tolerances && !ok ? kExitAssertion : 0;
}

int cmd_verify_split(const Context& ctx) {
  const auto& v = ctx.config.verify;
  const HalfSplitTrace trace = half_split_stats(v.n, v.m, v.trials, v.delta, v.rho, v.seed,
                                                v.ordering == "fixed" ? Ordering::Fixed : Ordering::Algorithmic);
  Csv csv({"k", "mean_ratio", "ratio_trials", "g_frequency", "mean_z", "variance_z", "mean_count"});
  bool moments_ok = true;
  for (const auto& s : trace.per_step) {
    csv.row(s.k, s.mean_ratio, s.ratio_trials, s.g_frequency, s.mean_z, s.variance_z, s.mean_count);
    moments_ok = moments_ok && std::abs(s.mean_z) <= 3.0 && std::abs(s.variance_z) <= 3.0;
  }
  write_text(ctx.out_dir / "split_steps.csv", csv.str());
  write_json(ctx.out_dir / "mc_report.json", split_to_json(trace));
  ctx.human << "k_star " << fmt("%.3f", trace.k_star) << ", steps " << trace.steps << "\n";
  for (const auto& s : trace.per_step) {
    ctx.human << "  k=" << s.k << "  mean ratio " << fmt("%.4f", s.mean_ratio) << "  z " << fmt("%+.2f", s.mean_z)
              << "  var z " << fmt("%+.2f", s.variance_z) << "\n";
  }
  ctx.human << "P(all G_k) " << fmt("%.4f", trace.all_g.empirical_p) << "  bound "
            << fmt("%.4f", *trace.all_g.theoretical_bound) << (trace.all_g.vacuous ? " (vacuous)" : "") << "\n";
  const bool ok = trace.all_g.passed && (trace.ordering != Ordering::Fixed || moments_ok);
  return ctx.config.analysis.assert_tolerances && !ok ? kExitAssertion : 0;
}

int cmd_verify_bias(const Context& ctx) {
  const auto& v = ctx.config.verify;
  const McReport r = mc_bias_bound(v.n_plus, v.n_minus, v.m, ctx.config.dataset.labels, v.trials, v.seed);
  Json out = report_to_json(r);
  out["n_plus"] = v.n_plus;
  out["n_minus"] = v.n_minus;
  out["m"] = v.m;
  write_json(ctx.out_dir / "mc_report.json", out);
  ctx.human << "frequency of pred <= bias bound " << fmt("%.4f", r.empirical_p) << " over " << r.trials - r.excluded
            << " interpolating trials (" << r.excluded << " excluded)\n";
  return 0;
}

int cmd_figures(const Context& ctx) {
  const fs::path dir = ctx.out_dir / "figures";
  const RunConfig fig1 = preset("fig1");
  const CompareResult r = run_compare(fig1, true);

  // Figure 1: loss curve with fit events and predicted jump times.
  {
    std::ostringstream csv;
    write_trajectory_csv(r.traj, csv, false);
    write_text(dir / "fig1_trajectory.csv", csv.str());
    Csv jumps({"k", "predicted_t", "observed_t", "predicted_epoch"});
    for (const auto& s : r.jumps.stages) {
      jumps.row(s.k, s.predicted, s.observed, epoch_at(s.predicted, fig1.train.lr, fig1.init.alpha_log));
    }
    write_text(dir / "fig1_jumps.csv", jumps.str());
  }
  // Figure 2: per-neuron log-norm slopes against their predictions.
  {
    Csv slopes({"neuron", "stage", "fitted", "samples", "fitted_slope", "predicted_slope"});
    for (const auto& e : r.slopes.entries) {
      if (!e.skipped) slopes.row(e.neuron, e.stage, e.fitted, e.samples, e.fitted_slope, e.predicted_slope);
    }
    write_text(dir / "fig2_slopes.csv", slopes.str());
  }
  // Figure 3: alignment with the predicted directions at mid-plateau.
  {
    const OrthonormalDataset data = make_dataset(fig1.dataset);
    Csv align({"stage", "epoch", "neuron", "cosine"});
    for (const auto& snap : r.traj.snapshots) {
      const int k = r.lp.stage_at(accelerated_time(double(snap.epoch), fig1.train.lr, fig1.init.alpha_log));
      const auto cos = alignment(std::span<const ScaledNeuron>(snap.state), r.lp, k, data);
      for (std::size_t j = 0; j < cos.size(); ++j) {
        if (cos[j]) align.row(k, snap.epoch, static_cast<int>(j), *cos[j]);
      }
    }
    write_text(dir / "fig3_alignment.csv", align.str());
  }
  // Figure 4: norm scaling in n via the limit process.
  {
    Context sub{preset("fig4"), dir / "fig4", ctx.human};
    cmd_sweep_n(sub);
  }
  // Figure 5: width sweep, small versus He initialization.
  {
    Context sub{preset("fig5"), dir / "fig5", ctx.human};
    cmd_sweep_m(sub);
  }
  ctx.human << "figures written to " << dir.string() << "\n";
  return 0;
}

}  // namespace s2s::cli
