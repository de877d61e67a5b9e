#include "app.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "s2s/error.hpp"

namespace s2s::cli {

namespace {

struct Options {
  std::string config_file;
  std::string preset_name = "custom";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool strict = false;
  bool print_config = false;
};

RunConfig resolve(const Options& o) {
  Json doc = to_json(preset(o.preset_name));
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + o.config_file);
    Json file;
    try {
      file = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::Config, o.config_file + ": " + e.what());
    }
    if (!file.is_object() || !file.contains("schema_version")) {
      throw Error(ErrorCode::Config, o.config_file + ": missing schema_version");
    }
    // Validate the file on its own so that unknown keys are reported, then layer it.
    from_json(file);
    doc.merge_patch(file);
  }
  for (const auto& assignment : o.overrides) apply_override(doc, assignment);
  if (o.seed) {
    doc["dataset"]["seed"] = *o.seed;
    doc["init"]["seed"] = *o.seed;
    doc["verify"]["seed"] = *o.seed;
  }
  if (o.strict) doc["build"]["strict"] = true;
  if (!o.out.empty()) doc["output_dir"] = o.out;
  return from_json(doc);
}

std::filesystem::path output_dir(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("S2S_OUT_DIR"); env && *env) return env;
  return "s2s-out";
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Saddle-to-saddle dynamics of two-layer ReLU networks on orthogonal data", "s2s"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config_file, "JSON run configuration (needs schema_version)");
  app.add_option("--preset", o.preset_name, "Start from a named preset")
      ->check(CLI::IsMember(preset_names()).description(""));
  app.add_option("--set", o.overrides, "Override a config key, e.g. --set train.lr=0.02");
  app.add_option("--seed", o.seed, "Seed for dataset, init and Monte-Carlo streams");
  app.add_option("--out", o.out, "Output directory (default: $S2S_OUT_DIR, then ./s2s-out)");
  app.add_flag("--strict", o.strict, "Fail on zero labels or ambiguous argmax while building");
  app.add_flag("--print-config", o.print_config, "Print the resolved configuration and exit");

  const std::map<std::string, std::pair<std::string, std::function<int(const Context&)>>> commands{
      {"limit", {"Build the limit process (writes limit.json)", cmd_limit}},
      {"train", {"Run gradient descent (writes trajectory.csv, final.json)", cmd_train}},
      {"compare", {"Compare training against the limit process (writes comparison.json)", cmd_compare}},
      {"sweep-n", {"Norm scaling in n (writes sweep_n.csv, sweep_n.json)", cmd_sweep_n}},
      {"sweep-m", {"Width sweep, small vs He init (writes sweep_m.csv, sweep_m.json)", cmd_sweep_m}},
      {"verify-assumptions", {"Monte-Carlo check of the mask assumption probability", cmd_verify_assumptions}},
      {"verify-split", {"Monte-Carlo check of incremental halving", cmd_verify_split}},
      {"verify-bias", {"Monte-Carlo frequency of the norm bound", cmd_verify_bias}},
      {"figures", {"Emit the CSVs behind every figure", cmd_figures}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e, out, err);
    return status == 0 ? 0 : kExitUsage;
  }

  try {
    const RunConfig config = resolve(o);
    if (o.print_config) {
      out << to_json(config).dump(2) << "\n";
      return 0;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const Context ctx{config, output_dir(config), out};
    std::filesystem::create_directories(ctx.out_dir);
    {
      std::ofstream cfg(ctx.out_dir / "config.json", std::ios::binary);
      cfg << to_json(config).dump(2) << "\n";
    }
    return commands.at(name).second(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Config ? kExitUsage : exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(ErrorCode::Io);
  }
}

}  // namespace s2s::cli
