// randens command-line frontend: forecast, sweep, compare, synth.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "randens/app/commands.hpp"
#include "randens/app/run_config.hpp"

namespace {

using randens::Error;
using randens::ErrorCode;
namespace app = randens::app;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 1;
  bool force = false;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
}

app::RunConfig load_with_overrides(const Overrides& o, bool require_window = true) {
  if (o.config.empty()) throw Error(ErrorCode::ConfigError, "--config is required");
  nlohmann::json j = read_json(o.config);
  if (o.seed) j["seed"] = *o.seed;
  if (!o.out.empty()) j["out"] = o.out;
  return app::parse_run_config(j, std::filesystem::path(o.config).parent_path(), require_window);
}

void add_common(CLI::App* cmd, Overrides& o, bool with_config = true) {
  if (with_config) cmd->add_option("--config,-c", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Override the top-level seed");
  cmd->add_option("--out,-o", o.out, "Output directory (file for synth)");
  cmd->add_option("--jobs,-j", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--force", o.force, "Overwrite an existing output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Pattern-based forecasting with ensembles of randomized neural networks"};
  cli.require_subcommand(1);

  Overrides o;
  std::vector<std::string> runs;

  auto* forecast = cli.add_subcommand("forecast", "Rolling daily forecast over the test window");
  add_common(forecast, o);
  auto* sweep = cli.add_subcommand("sweep", "MAPE and diversity over a hyperparameter grid");
  add_common(sweep, o);
  auto* compare = cli.add_subcommand("compare", "Pairwise Giacomini-White tests between finished runs");
  add_common(compare, o, false);
  compare->add_option("runs", runs, "Run directories holding forecast.csv")->required();
  auto* synth = cli.add_subcommand("synth", "Write a synthetic triple-seasonal series as CSV");
  add_common(synth, o);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const app::CommandOptions opts{o.jobs, o.force};
    if (forecast->parsed()) {
      const auto run = app::cmd_forecast(load_with_overrides(o), opts);
      std::cout << "forecast: " << run.result.days.size() << " days, " << run.result.skipped.size()
                << " skipped, MAPE " << run.metrics.mape;
      if (run.diversity) std::cout << ", diversity " << run.diversity->value;
      std::cout << '\n';
    } else if (sweep->parsed()) {
      const auto rows = app::cmd_sweep(load_with_overrides(o), opts);
      std::cout << "sweep: " << rows.size() << " cells\n";
    } else if (compare->parsed()) {
      const auto res = app::cmd_compare(runs, o.out, opts);
      std::cout << "compare: " << res.names.size() << " runs\n";
    } else if (synth->parsed()) {
      randens::SynthParams params;
      if (!o.config.empty()) {
        const auto cfg = load_with_overrides(o, false);
        if (!cfg.synth) throw Error(ErrorCode::ConfigError, "data.synth: synth needs a synthetic data section");
        params = *cfg.synth;
      }
      if (o.seed) params.seed = *o.seed;
      const auto series = app::cmd_synth(params, o.out, opts);
      std::cout << "synth: " << series.size() << " rows\n";
    }
  } catch (const Error& e) {
    std::cerr << "randens: " << e.what() << '\n';
    return app::exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "randens: IoError: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "randens: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
