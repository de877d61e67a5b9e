#include "s2s/json_io.hpp"

#include <cmath>
#include <limits>

#include "s2s/error.hpp"

namespace s2s {

namespace {

Json vec(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd to_vec(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json mat(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r).transpose()));
  return out;
}

Eigen::MatrixXd to_mat(const Json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw Error(ErrorCode::DimensionMismatch, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = j[r][c].get<double>();
  }
  return m;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double number_or_inf(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json dataset_to_json(const OrthonormalDataset& data) {
  Json j;
  j["n"] = data.n();
  j["d"] = data.d();
  j["basis"] = data.is_identity() ? Json("identity") : mat(data.input_matrix());
  j["labels"] = vec(data.labels());
  return j;
}

OrthonormalDataset dataset_from_json(const Json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int d = j.at("d").get<int>();
    Eigen::VectorXd labels = to_vec(j.at("labels"));
    if (labels.size() != n) throw Error(ErrorCode::DimensionMismatch, "labels length differs from n");
    const Json& basis = j.at("basis");
    if (basis.is_string()) {
      if (basis.get<std::string>() != "identity") throw Error(ErrorCode::Config, "unknown basis");
      if (d != n) throw Error(ErrorCode::DimensionMismatch, "identity basis needs d = n");
      return OrthonormalDataset::identity(std::move(labels));
    }
    Eigen::MatrixXd inputs = to_mat(basis, d);
    if (inputs.rows() != n) throw Error(ErrorCode::DimensionMismatch, "basis rows differ from n");
    return OrthonormalDataset::explicit_inputs(std::move(inputs), std::move(labels));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Config, std::string("dataset: ") + e.what());
  }
}

Json limit_process_to_json(const LimitProcess& lp) {
  Json j;
  j["n"] = lp.n;
  j["m"] = lp.m;
  j["labels"] = vec(lp.labels);
  j["signs"] = lp.signs;
  j["supports"] = lp.supports;
  Json times = Json::array();
  for (double t : lp.jump_times) times.push_back(finite_or_null(t));
  j["jump_times"] = times;
  Json stages = Json::array();
  for (const auto& s : lp.stages) {
    Json st;
    st["k"] = s.k;
    st["time"] = s.time;
    st["unfitted_data"] = s.unfitted_data;
    st["unfitted_neurons"] = s.unfitted_neurons;
    st["d_norms"] = s.d_norms;
    st["exponents"] = s.exponents;
    st["selected"] = opt(s.selected);
    st["newly_fitted"] = s.newly_fitted;
    stages.push_back(st);
  }
  j["stages"] = stages;
  j["final_params"] = {{"a", vec(lp.final_params.a)}, {"W", mat(lp.final_params.W)}};
  const auto& a = lp.assumption_report;
  j["assumptions"] = {{"rows_nonzero", a.rows_nonzero},
                      {"cols_nonzero", a.cols_nonzero},
                      {"cols_distinct", a.cols_distinct},
                      {"labels_nonzero", a.labels_nonzero},
                      {"argmax_unique", opt(a.argmax_unique)},
                      {"passed", a.passed()}};
  j["interpolating"] = lp.interpolating;
  j["pred_sq_norm"] = pred_sq_norm(lp);
  j["opt_sq_norm"] = opt_sq_norm(lp.labels);
  j["bias_bound"] = bias_bound(lp.labels);
  return j;
}

LimitProcess limit_process_from_json(const Json& j) {
  try {
    LimitProcess lp;
    lp.n = j.at("n").get<int>();
    lp.m = j.at("m").get<int>();
    lp.labels = to_vec(j.at("labels"));
    lp.signs = j.at("signs").get<std::vector<int>>();
    lp.supports = j.at("supports").get<std::vector<std::vector<int>>>();
    for (const auto& t : j.at("jump_times")) lp.jump_times.push_back(number_or_inf(t));
    for (const auto& st : j.at("stages")) {
      StageRecord s;
      s.k = st.at("k").get<int>();
      s.time = st.at("time").get<double>();
      s.unfitted_data = st.at("unfitted_data").get<std::vector<int>>();
      s.unfitted_neurons = st.at("unfitted_neurons").get<std::vector<int>>();
      s.d_norms = st.at("d_norms").get<std::vector<double>>();
      s.exponents = st.at("exponents").get<std::vector<double>>();
      if (!st.at("selected").is_null()) s.selected = st.at("selected").get<int>();
      s.newly_fitted = st.at("newly_fitted").get<std::vector<int>>();
      lp.stages.push_back(std::move(s));
    }
    const Json& fp = j.at("final_params");
    lp.final_params.a = to_vec(fp.at("a"));
    lp.final_params.W = to_mat(fp.at("W"), lp.n);
    const Json& a = j.at("assumptions");
    lp.assumption_report.rows_nonzero = a.at("rows_nonzero").get<bool>();
    lp.assumption_report.cols_nonzero = a.at("cols_nonzero").get<bool>();
    lp.assumption_report.cols_distinct = a.at("cols_distinct").get<bool>();
    lp.assumption_report.labels_nonzero = a.at("labels_nonzero").get<bool>();
    if (!a.at("argmax_unique").is_null()) lp.assumption_report.argmax_unique = a.at("argmax_unique").get<bool>();
    lp.interpolating = j.at("interpolating").get<bool>();
    if (lp.labels.size() != lp.n || static_cast<int>(lp.signs.size()) != lp.m ||
        lp.jump_times.size() != lp.stages.size() + 1) {
      throw Error(ErrorCode::DimensionMismatch, "inconsistent limit process record");
    }
    return lp;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Config, std::string("limit process: ") + e.what());
  }
}

Json report_to_json(const McReport& r) {
  return {{"trials", r.trials},
          {"successes", r.successes},
          {"excluded", r.excluded},
          {"empirical_p", r.empirical_p},
          {"ci95_halfwidth", r.ci95_halfwidth},
          {"theoretical_bound", opt(r.theoretical_bound)},
          {"vacuous", r.vacuous},
          {"passed", r.passed}};
}

Json split_to_json(const HalfSplitTrace& trace) {
  Json steps = Json::array();
  for (const auto& s : trace.per_step) {
    steps.push_back({{"k", s.k},
                     {"mean_ratio", s.mean_ratio},
                     {"ratio_trials", s.ratio_trials},
                     {"g_frequency", s.g_frequency},
                     {"mean_z", s.mean_z},
                     {"variance_z", s.variance_z},
                     {"mean_count", s.mean_count}});
  }
  return {{"n", trace.n},
          {"m", trace.m},
          {"delta", trace.delta},
          {"rho", trace.rho},
          {"k_star", trace.k_star},
          {"steps", trace.steps},
          {"ordering", trace.ordering == Ordering::Fixed ? "fixed" : "algorithmic"},
          {"per_step", steps},
          {"all_g", report_to_json(trace.all_g)}};
}

Json comparison_to_json(const JumpComparison& c) {
  Json stages = Json::array();
  for (const auto& s : c.stages) {
    stages.push_back({{"k", s.k},
                      {"predicted", s.predicted},
                      {"observed", s.observed},
                      {"relative_error", s.relative_error},
                      {"sets_match", s.sets_match}});
  }
  return {{"stages", stages}, {"max_relative_error", c.max_relative_error}, {"all_sets_match", c.all_sets_match}};
}

Json slopes_to_json(const SlopeReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"neuron", e.neuron},
                       {"stage", e.stage},
                       {"fitted", e.fitted},
                       {"samples", e.samples},
                       {"skipped", e.skipped},
                       {"fitted_slope", e.fitted_slope},
                       {"predicted_slope", e.predicted_slope},
                       {"relative_error", opt(e.relative_error)}});
  }
  return {{"entries", entries}, {"max_relative_error", r.max_relative_error}};
}

}  // namespace s2s
