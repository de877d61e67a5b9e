#include "config.hpp"

#include <cmath>
#include <set>

#include "s2s/error.hpp"

namespace s2s::cli {

namespace {

// Reads the keys of one JSON object and rejects any key it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorCode::Config, where() + " must be an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw Error(ErrorCode::Config, "bad value for " + where() + key);
    }
  }

  const Json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string child_path(const std::string& key) const { return where() + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw Error(ErrorCode::Config, "unknown key " + where() + item.key());
    }
  }

 private:
  std::string where() const { return path_.empty() ? "" : path_ + "."; }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const char* label_kind_name(LabelKind kind) {
  switch (kind) {
    case LabelKind::Explicit: return "explicit";
    case LabelKind::AbsGaussian: return "abs_gaussian";
    case LabelKind::Gaussian: return "gaussian";
    case LabelKind::Constant: return "constant";
  }
  return "?";
}

LabelKind label_kind_from(const std::string& name) {
  if (name == "explicit") return LabelKind::Explicit;
  if (name == "abs_gaussian") return LabelKind::AbsGaussian;
  if (name == "gaussian") return LabelKind::Gaussian;
  if (name == "constant") return LabelKind::Constant;
  throw Error(ErrorCode::Config, "unknown label kind '" + name + "'");
}

void require_one_of(const std::string& value, std::initializer_list<const char*> allowed, const std::string& key) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  throw Error(ErrorCode::Config, "invalid value '" + value + "' for " + key);
}

Json labels_json(const LabelSpec& spec) {
  return {{"kind", label_kind_name(spec.kind)}, {"values", spec.values}, {"constant", spec.constant}};
}

LabelSpec labels_from(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  LabelSpec spec;
  std::string kind = label_kind_name(spec.kind);
  r.get("kind", kind);
  spec.kind = label_kind_from(kind);
  r.get("values", spec.values);
  r.get("constant", spec.constant);
  r.finish();
  return spec;
}

}  // namespace

double InitSpec::effective_alpha_log(int width) const {
  return scale_rule == "per-width" ? alpha_log - 0.5 * std::log(double(width)) : alpha_log;
}

TrainerConfig TrainSpec::trainer_config() const {
  TrainerConfig c;
  c.lr = lr;
  c.max_epochs = max_epochs;
  c.loss_stop = loss_stop;
  c.record_every = record_every;
  c.fit_threshold = fit_threshold;
  c.band = {renorm_low, renorm_high};
  c.record_residuals = record_residuals;
  return c;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["output_dir"] = c.output_dir;
  j["dataset"] = {{"n", c.dataset.n},
                  {"d", c.dataset.d},
                  {"basis", c.dataset.basis},
                  {"labels", labels_json(c.dataset.labels)},
                  {"seed", c.dataset.seed}};
  j["init"] = {{"mode", c.init.mode},
               {"m", c.init.m},
               {"alpha_log", c.init.alpha_log},
               {"scale_rule", c.init.scale_rule},
               {"seed", c.init.seed},
               {"signs", c.init.signs},
               {"directions", c.init.directions}};
  j["train"] = {{"path", c.train.path},
                {"lr", c.train.lr},
                {"max_epochs", c.train.max_epochs},
                {"loss_stop", c.train.loss_stop},
                {"record_every", c.train.record_every},
                {"fit_threshold", c.train.fit_threshold},
                {"renorm_low", c.train.renorm_low},
                {"renorm_high", c.train.renorm_high},
                {"record_residuals", c.train.record_residuals}};
  j["build"] = {{"strict", c.build.strict}, {"tie_tolerance", c.build.tie_tolerance}};
  j["analysis"] = {{"assert", c.analysis.assert_tolerances},
                   {"jump_window", c.analysis.jump_window},
                   {"slope_margin", c.analysis.slope_margin},
                   {"min_samples", c.analysis.min_samples},
                   {"jump_tolerance", c.analysis.jump_tolerance},
                   {"slope_tolerance", c.analysis.slope_tolerance},
                   {"norm_tolerance", c.analysis.norm_tolerance},
                   {"limit_file", c.analysis.limit_file},
                   {"trajectory_file", c.analysis.trajectory_file}};
  j["sweep"] = {{"n_values", c.sweep.n_values},
                {"m_values", c.sweep.m_values},
                {"seeds", c.sweep.seeds},
                {"width_rule", c.sweep.width_rule},
                {"engine", c.sweep.engine},
                {"inits", c.sweep.inits},
                {"he_lr", c.sweep.he_lr}};
  j["verify"] = {{"n_half", c.verify.n_half},
                 {"m_values", c.verify.m_values},
                 {"n_plus", c.verify.n_plus},
                 {"n_minus", c.verify.n_minus},
                 {"m", c.verify.m},
                 {"trials", c.verify.trials},
                 {"seed", c.verify.seed},
                 {"n", c.verify.n},
                 {"delta", c.verify.delta},
                 {"rho", c.verify.rho},
                 {"ordering", c.verify.ordering}};
  return j;
}

RunConfig from_json(const Json& j) {
  RunConfig c;
  ObjectReader root(j, "");
  root.get("schema_version", c.schema_version);
  if (!j.contains("schema_version")) throw Error(ErrorCode::Config, "missing schema_version");
  if (c.schema_version != kSchemaVersion) {
    throw Error(ErrorCode::Config, "unsupported schema_version " + std::to_string(c.schema_version));
  }
  root.get("name", c.name);
  root.get("output_dir", c.output_dir);

  if (const Json* s = root.child("dataset")) {
    ObjectReader r(*s, "dataset");
    r.get("n", c.dataset.n);
    r.get("d", c.dataset.d);
    r.get("basis", c.dataset.basis);
    require_one_of(c.dataset.basis, {"identity", "random"}, "dataset.basis");
    if (const Json* l = r.child("labels")) c.dataset.labels = labels_from(*l, "dataset.labels");
    r.get("seed", c.dataset.seed);
    r.finish();
  }
  if (const Json* s = root.child("init")) {
    ObjectReader r(*s, "init");
    r.get("mode", c.init.mode);
    require_one_of(c.init.mode, {"balanced", "explicit", "he-uniform"}, "init.mode");
    r.get("m", c.init.m);
    r.get("alpha_log", c.init.alpha_log);
    r.get("scale_rule", c.init.scale_rule);
    require_one_of(c.init.scale_rule, {"fixed", "per-width"}, "init.scale_rule");
    r.get("seed", c.init.seed);
    r.get("signs", c.init.signs);
    r.get("directions", c.init.directions);
    r.finish();
  }
  if (const Json* s = root.child("train")) {
    ObjectReader r(*s, "train");
    r.get("path", c.train.path);
    require_one_of(c.train.path, {"auto", "log", "dense"}, "train.path");
    r.get("lr", c.train.lr);
    r.get("max_epochs", c.train.max_epochs);
    r.get("loss_stop", c.train.loss_stop);
    r.get("record_every", c.train.record_every);
    r.get("fit_threshold", c.train.fit_threshold);
    r.get("renorm_low", c.train.renorm_low);
    r.get("renorm_high", c.train.renorm_high);
    r.get("record_residuals", c.train.record_residuals);
    r.finish();
  }
  if (const Json* s = root.child("build")) {
    ObjectReader r(*s, "build");
    r.get("strict", c.build.strict);
    r.get("tie_tolerance", c.build.tie_tolerance);
    r.finish();
  }
  if (const Json* s = root.child("analysis")) {
    ObjectReader r(*s, "analysis");
    r.get("assert", c.analysis.assert_tolerances);
    r.get("jump_window", c.analysis.jump_window);
    r.get("slope_margin", c.analysis.slope_margin);
    r.get("min_samples", c.analysis.min_samples);
    r.get("jump_tolerance", c.analysis.jump_tolerance);
    r.get("slope_tolerance", c.analysis.slope_tolerance);
    r.get("norm_tolerance", c.analysis.norm_tolerance);
    r.get("limit_file", c.analysis.limit_file);
    r.get("trajectory_file", c.analysis.trajectory_file);
    r.finish();
  }
  if (const Json* s = root.child("sweep")) {
    ObjectReader r(*s, "sweep");
    r.get("n_values", c.sweep.n_values);
    r.get("m_values", c.sweep.m_values);
    r.get("seeds", c.sweep.seeds);
    r.get("width_rule", c.sweep.width_rule);
    require_one_of(c.sweep.width_rule, {"fixed", "log10000"}, "sweep.width_rule");
    r.get("engine", c.sweep.engine);
    require_one_of(c.sweep.engine, {"limit", "train"}, "sweep.engine");
    r.get("inits", c.sweep.inits);
    for (const auto& mode : c.sweep.inits) require_one_of(mode, {"balanced", "he-uniform"}, "sweep.inits");
    r.get("he_lr", c.sweep.he_lr);
    r.finish();
  }
  if (const Json* s = root.child("verify")) {
    ObjectReader r(*s, "verify");
    r.get("n_half", c.verify.n_half);
    r.get("m_values", c.verify.m_values);
    r.get("n_plus", c.verify.n_plus);
    r.get("n_minus", c.verify.n_minus);
    r.get("m", c.verify.m);
    r.get("trials", c.verify.trials);
    r.get("seed", c.verify.seed);
    r.get("n", c.verify.n);
    r.get("delta", c.verify.delta);
    r.get("rho", c.verify.rho);
    r.get("ordering", c.verify.ordering);
    require_one_of(c.verify.ordering, {"fixed", "algorithmic"}, "verify.ordering");
    r.finish();
  }
  root.finish();
  return c;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::Config, "override must look like key.path=value: '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) throw Error(ErrorCode::Config, "unknown config key " + path);
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  *node = std::move(value);
}

int width_rule_log10000(int n) {
  return static_cast<int>(std::ceil(std::log(10000.0 * n) / std::log(4.0 / 3.0)));
}

std::vector<std::string> preset_names() {
  return {"fig1", "e1", "e2", "fig4", "fig5", "prop42", "split", "bias"};
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  if (name == "fig1") {
    c.dataset = {64, 64, "identity", LabelSpec::abs_gaussian(), 3480};
    c.init.m = 6;
    c.init.alpha_log = -500.0;
    c.init.seed = 3480;
    c.analysis.assert_tolerances = true;
  } else if (name == "e1" || name == "e2") {
    c.dataset = {2, 2, "identity", LabelSpec::explicit_values({1.0, 2.0}), 0};
    c.init.mode = "explicit";
    c.init.m = 2;
    c.init.alpha_log = -200.0;
    c.init.signs = {1, 1};
    c.init.directions = name == "e1" ? std::vector<std::vector<double>>{{1.0, -1.0}, {1.0, 1.0}}
                                     : std::vector<std::vector<double>>{{1.0, -1.0}, {-1.0, 1.0}};
    c.train.record_every = 100;
    c.analysis.jump_tolerance = 0.1;
    c.analysis.assert_tolerances = true;
  } else if (name == "fig4") {
    c.dataset.labels = LabelSpec::gaussian();
    c.sweep.width_rule = "log10000";
    c.sweep.engine = "limit";
    c.init.alpha_log = std::log(1e-30);
    c.init.scale_rule = "per-width";
  } else if (name == "fig5") {
    c.dataset = {32, 32, "identity", LabelSpec::gaussian(), 0};
    c.init.alpha_log = std::log(1e-30);
    c.init.scale_rule = "per-width";
    c.train.path = "dense";
    c.train.lr = 1.0;
    c.train.max_epochs = 1'000'000;
    c.train.loss_stop = 1e-10;
    c.train.record_every = 10'000;
    c.train.record_residuals = false;
    c.sweep.he_lr = 0.001;
  } else if (name == "prop42") {
    c.verify.n_plus = 32;
    c.verify.n_minus = 32;
    c.verify.m = 20;
    c.verify.trials = 10'000;
  } else if (name == "split") {
    c.verify.n = 4096;
    c.verify.m = 20;
    c.verify.trials = 1000;
    c.verify.delta = 0.025;
    c.verify.rho = 0.25;
  } else if (name == "bias") {
    c.dataset.labels = LabelSpec::constant_value(1.0);
    c.verify.n_plus = 64;
    c.verify.n_minus = 0;
    c.verify.m = 40;
    c.verify.trials = 1000;
  } else if (name != "custom") {
    throw Error(ErrorCode::Config, "unknown preset '" + name + "'");
  }
  return c;
}

OrthonormalDataset make_dataset(const DatasetSpec& spec) {
  if (spec.labels.kind == LabelKind::Explicit && static_cast<int>(spec.labels.values.size()) != spec.n) {
    throw Error(ErrorCode::DimensionMismatch, "explicit labels must have n entries");
  }
  return generate_dataset(spec.n, spec.d, spec.labels,
                          spec.basis == "identity" ? Basis::Identity : Basis::RandomOrthonormal, spec.seed);
}

InitDraw make_init_draw(const InitSpec& spec, int m, int d) {
  const double alpha_log = spec.effective_alpha_log(m);
  if (spec.mode == "explicit") {
    if (static_cast<int>(spec.signs.size()) != m || static_cast<int>(spec.directions.size()) != m) {
      throw Error(ErrorCode::DimensionMismatch, "explicit init needs m signs and m directions");
    }
    Eigen::MatrixXd dirs(m, d);
    for (int j = 0; j < m; ++j) {
      if (static_cast<int>(spec.directions[j].size()) != d) {
        throw Error(ErrorCode::DimensionMismatch, "direction length must equal d");
      }
      for (int k = 0; k < d; ++k) dirs(j, k) = spec.directions[j][k];
    }
    return make_init(spec.signs, dirs, alpha_log);
  }
  if (spec.mode != "balanced") throw Error(ErrorCode::Config, "init mode '" + spec.mode + "' has no balanced draw");
  return sample_init(m, d, alpha_log, spec.seed);
}

BuildOptions build_options(const BuildSpec& spec) { return {spec.strict, spec.tie_tolerance}; }

}  // namespace s2s::cli
