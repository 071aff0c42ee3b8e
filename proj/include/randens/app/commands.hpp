#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randens/app/run_config.hpp"
#include "randens/csv_io.hpp"
#include "randens/ensemble.hpp"
#include "randens/error.hpp"
#include "randens/gw_test.hpp"
#include "randens/metrics.hpp"
#include "randens/rolling.hpp"
#include "randens/serialization.hpp"
#include "randens/synth.hpp"

namespace randens::app {

inline constexpr const char* kToolVersion = "1.0.0";

struct CommandOptions {
  std::size_t jobs = 1;
  bool force = false;
};

/// 1: configuration, 2: data, 3: numerical failure.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidParameter:
    case ErrorCode::InvalidAngle:
    case ErrorCode::EmptyGrid:
      return 1;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::GapError:
    case ErrorCode::DuplicateTimestamp:
    case ErrorCode::MisalignedCycles:
    case ErrorCode::MissingHistory:
    case ErrorCode::ZeroActual:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::WindowMismatch:
    case ErrorCode::EmptyTrainingSet:
    case ErrorCode::InsufficientData:
    case ErrorCode::ZeroDispersion:
      return 2;
    case ErrorCode::NonFinite:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::EmptyPool:
    case ErrorCode::EmptySubsample:
      return 3;
  }
  return 3;
}

namespace detail {

inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// FNV-1a over the canonical (key-sorted) JSON dump.
inline std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::filesystem::path prepare_out_dir(const std::string& out, bool force) {
  if (out.empty()) throw Error(ErrorCode::ConfigError, "out: an output directory is required (--out)");
  const std::filesystem::path dir(out);
  std::error_code ec;
  if (std::filesystem::exists(dir, ec)) {
    if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorCode::ConfigError, "out: " + out + " is not a directory");
    if (!std::filesystem::is_empty(dir, ec) && !force)
      throw Error(ErrorCode::ConfigError, "out: " + out + " already holds a run (use --force to overwrite)");
  }
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out + ": " + ec.message());
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

inline nlohmann::json metrics_json(const MetricsReport& m) {
  return {{"mape", m.mape}, {"median_ape", m.median_ape}, {"rmse", m.rmse}, {"mpe", m.mpe},
          {"std_pe", m.std_pe}, {"n_days", m.n_days}, {"n_points", m.n_points}};
}

inline std::string model_label(const RunConfig& cfg) {
  switch (cfg.model.kind) {
    case ModelSpec::Kind::Naive: return "naive";
    case ModelSpec::Kind::Single: return "randnn";
    case ModelSpec::Kind::Ensemble: return std::string(to_string(cfg.model.strategy.kind));
  }
  return "model";
}

inline RollingOptions rolling_options(const RunConfig& cfg, std::uint64_t seed, std::size_t jobs) {
  RollingOptions opt;
  opt.test_start = cfg.test_start;
  opt.test_end = cfg.test_end;
  opt.horizon = cfg.horizon;
  opt.weekday_pairing = cfg.weekday_pairing;
  opt.seed = seed;
  opt.jobs = jobs;
  opt.keep_member_forecasts = cfg.keep_member_forecasts && cfg.model.kind == ModelSpec::Kind::Ensemble;
  return opt;
}

inline std::optional<DiversityReport> run_diversity(const RollingForecastResult& r) {
  std::vector<Matrix> blocks;
  for (const auto& d : r.days)
    if (d.members) blocks.push_back(*d.members);
  if (blocks.empty() || blocks.size() != r.days.size()) return std::nullopt;
  return diversity(blocks);
}

/// Mean over members of each member's own MAPE (ensembles with member forecasts).
inline std::optional<double> mean_member_mape(const RollingForecastResult& r) {
  if (r.days.empty() || !r.days.front().members) return std::nullopt;
  const Matrix A = r.actuals();
  const auto M = r.days.front().members->rows();
  double total = 0.0;
  for (Eigen::Index k = 0; k < M; ++k) {
    Matrix F(A.rows(), A.cols());
    for (std::size_t i = 0; i < r.days.size(); ++i) F.row(static_cast<Eigen::Index>(i)) = r.days[i].members->row(k);
    total += mape(A, F);
  }
  return total / static_cast<double>(M);
}

}  // namespace detail

inline std::string forecast_csv(const RollingForecastResult& r) {
  std::ostringstream out;
  out << "date,hour,actual,forecast\n";
  for (const auto& d : r.days) {
    const auto date = format_date(d.date);
    for (std::size_t h = 0; h < d.actual.size(); ++h)
      out << date << ',' << h << ',' << detail::fmt_real(d.actual[h]) << ',' << detail::fmt_real(d.forecast[h]) << '\n';
  }
  return out.str();
}

struct ForecastRun {
  RollingForecastResult result;
  MetricsReport metrics;
  std::optional<DiversityReport> diversity;
  std::optional<double> member_mape_mean;
  nlohmann::json manifest;
};

/// Rolling forecast over the configured test window. Writes forecast.csv,
/// metrics.json, metrics.csv, diversity.json and manifest.json into cfg.out.
inline ForecastRun cmd_forecast(const RunConfig& cfg, const CommandOptions& opts) {
  const auto dir = detail::prepare_out_dir(cfg.out, opts.force);
  const TimeSeries series = load_series(cfg);
  ForecastRun run;
  run.result = rolling_forecast(series, cfg.model, detail::rolling_options(cfg, cfg.seed, opts.jobs));
  if (run.result.days.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no test day could be forecast");
  const Matrix A = run.result.actuals(), F = run.result.forecasts();
  run.metrics = compute_metrics(A, F);
  run.diversity = detail::run_diversity(run.result);
  run.member_mape_mean = detail::mean_member_mape(run.result);
  const ApeDistribution ape = ape_distribution(A, F);

  detail::write_text(dir / "forecast.csv", forecast_csv(run.result));

  nlohmann::json metrics = detail::metrics_json(run.metrics);
  metrics["model"] = detail::model_label(cfg);
  nlohmann::json quant = nlohmann::json::object();
  for (std::size_t k = 0; k < ape.levels.size(); ++k) quant["p" + std::to_string(static_cast<int>(ape.levels[k]))] = ape.quantiles[k];
  metrics["ape_quantiles"] = quant;
  if (run.member_mape_mean) metrics["member_mape_mean"] = *run.member_mape_mean;
  detail::write_text(dir / "metrics.json", metrics.dump(2) + "\n");

  std::ostringstream table;
  table << "metric," << detail::model_label(cfg) << "\n"
        << "MAPE," << detail::fmt_real(run.metrics.mape) << "\n"
        << "Median(APE)," << detail::fmt_real(run.metrics.median_ape) << "\n"
        << "RMSE," << detail::fmt_real(run.metrics.rmse) << "\n"
        << "MPE," << detail::fmt_real(run.metrics.mpe) << "\n"
        << "Std(PE)," << detail::fmt_real(run.metrics.std_pe) << "\n";
  detail::write_text(dir / "metrics.csv", table.str());

  nlohmann::json div = nullptr;
  if (run.diversity) div = {{"value", run.diversity->value}, {"test_set_size", run.diversity->test_set_size}};
  detail::write_text(dir / "diversity.json", div.dump(2) + "\n");

  nlohmann::json& m = run.manifest;
  m["tool"] = "randens";
  m["tool_version"] = kToolVersion;
  m["model_format_version"] = kModelFormatVersion;
  m["command"] = "forecast";
  m["config"] = cfg.document;
  m["config_hash"] = detail::config_hash(cfg.document);
  m["seed"] = cfg.seed;
  m["seed_derivation"] = {{"day", "splitmix64(seed ^ splitmix64(days_since_1970_01_01))"},
                          {"template", "day seed"},
                          {"member_k", "day seed + k, k = 1..M"}};
  nlohmann::json days = nlohmann::json::array();
  for (const auto& d : run.result.days) days.push_back({{"date", format_date(d.date)}, {"seed", d.seed}, {"training_pairs", d.training_pairs}});
  m["days"] = days;
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : run.result.skipped) skipped.push_back({{"date", format_date(s.date)}, {"reason", s.reason}});
  m["skipped"] = skipped;
  m["artifacts"] = {"forecast.csv", "metrics.json", "metrics.csv", "diversity.json", "manifest.json"};
  detail::write_text(dir / "manifest.json", m.dump(2) + "\n");
  return run;
}

struct SweepRow {
  std::size_t m = 0;
  double alpha_max = 0.0;
  double parameter = 0.0;
  std::size_t repeats = 0;
  double mape = 0.0;
  double diversity = 0.0;
  std::size_t skipped_days = 0;
};

/// Evaluates every (m, alpha_max, parameter) cell of the sweep grid, averaging
/// MAPE and diversity over `repeats` run seeds derive_seed(seed, r).
/// For E1 the strategy parameter is alpha_max, so the two axes coincide.
inline std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, const CommandOptions& opts) {
  if (cfg.model.kind != ModelSpec::Kind::Ensemble)
    throw Error(ErrorCode::ConfigError, "model: sweeps require model = 'ensemble'");
  if (cfg.sweep.empty()) throw Error(ErrorCode::ConfigError, "sweep: the grid is empty");
  const auto dir = detail::prepare_out_dir(cfg.out, opts.force);
  const TimeSeries series = load_series(cfg);
  const CycleIndex cycles(series);
  const bool e1 = cfg.model.strategy.kind == Strategy::E1;

  std::vector<std::size_t> ms = cfg.sweep.m.empty() ? std::vector<std::size_t>{cfg.model.base.m} : cfg.sweep.m;
  std::vector<double> params = cfg.sweep.parameter;
  std::vector<double> alphas = cfg.sweep.alpha_max;
  if (e1) {
    if (params.empty()) params = alphas;
    if (params.empty()) params = {cfg.model.strategy.parameter};
    alphas = {0.0};  // placeholder axis, replaced by the parameter
  } else {
    if (params.empty()) params = {cfg.model.strategy.parameter};
    if (alphas.empty()) alphas = {cfg.model.base.alpha_max};
  }

  std::vector<SweepRow> rows;
  for (std::size_t m : ms) {
    for (double alpha : alphas) {
      for (double p : params) {
        ModelSpec spec = cfg.model;
        spec.base.m = m;
        spec.base.alpha_max = e1 ? p : alpha;
        spec.strategy.parameter = p;
        SweepRow row{m, spec.base.alpha_max, p, cfg.sweep.repeats, 0.0, 0.0, 0};
        RunConfig cell_cfg = cfg;
        cell_cfg.keep_member_forecasts = true;
        for (std::size_t r = 0; r < cfg.sweep.repeats; ++r) {
          const auto result = rolling_forecast(cycles, spec, detail::rolling_options(cell_cfg, derive_seed(cfg.seed, r), opts.jobs));
          if (result.days.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no test day could be forecast");
          row.mape += mape(result.actuals(), result.forecasts());
          row.diversity += detail::run_diversity(result).value_or(DiversityReport{}).value;
          row.skipped_days += result.skipped.size();
        }
        row.mape /= static_cast<double>(cfg.sweep.repeats);
        row.diversity /= static_cast<double>(cfg.sweep.repeats);
        rows.push_back(row);
      }
    }
  }

  std::ostringstream csv;
  csv << "strategy,m,alpha_max,parameter,repeats,mape,diversity\n";
  for (const auto& r : rows)
    csv << to_string(cfg.model.strategy.kind) << ',' << r.m << ',' << detail::fmt_real(r.alpha_max) << ','
        << detail::fmt_real(r.parameter) << ',' << r.repeats << ',' << detail::fmt_real(r.mape) << ','
        << detail::fmt_real(r.diversity) << '\n';
  detail::write_text(dir / "sweep.csv", csv.str());

  nlohmann::json m;
  m["tool"] = "randens";
  m["tool_version"] = kToolVersion;
  m["command"] = "sweep";
  m["config"] = cfg.document;
  m["config_hash"] = detail::config_hash(cfg.document);
  m["seed"] = cfg.seed;
  m["seed_derivation"] = {{"repeat_r", "splitmix64(seed ^ splitmix64(r)), r = 0..repeats-1"},
                          {"day", "splitmix64(repeat seed ^ splitmix64(days_since_1970_01_01))"},
                          {"member_k", "day seed + k, k = 1..M"}};
  m["cells"] = rows.size();
  m["artifacts"] = {"sweep.csv", "manifest.json"};
  detail::write_text(dir / "manifest.json", m.dump(2) + "\n");
  return rows;
}

/// Forecast table of a finished run, keyed by date.
struct RunForecasts {
  std::string name;
  std::map<Date, std::pair<std::vector<double>, std::vector<double>>> days;  // actual, forecast
};

inline RunForecasts read_forecast_csv(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  RunForecasts run;
  run.name = std::move(name);
  std::string line;
  std::getline(in, line);
  if (line.rfind("date,hour,actual,forecast", 0) != 0)
    throw Error(ErrorCode::ParseError, path.string() + ": unexpected header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (randens::detail::trim(line).empty()) continue;
    const auto f = randens::detail::split_fields(line);
    double a = 0.0, v = 0.0;
    int hour = 0;
    if (f.size() != 4 || !randens::detail::parse_int(f[1], hour) || !randens::detail::parse_double(f[2], a) ||
        !randens::detail::parse_double(f[3], v))
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + " is malformed");
    auto& day = run.days[parse_date(f[0])];
    if (static_cast<std::size_t>(hour) != day.first.size())
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(line_no) + " is out of order");
    day.first.push_back(a);
    day.second.push_back(v);
  }
  return run;
}

struct CompareResult {
  std::vector<std::string> names;
  /// p(i, j): one-sided p-value that run j (column) is more accurate than run i (row).
  Matrix p_values;
  std::vector<MetricsReport> metrics;
};

/// Pairwise Giacomini-White p-values and a metrics table for finished runs.
/// Writes gw_pvalues.csv, metrics_table.csv and compare.json into `out`.
inline CompareResult cmd_compare(const std::vector<std::string>& run_dirs, const std::string& out,
                                 const CommandOptions& opts) {
  if (run_dirs.empty()) throw Error(ErrorCode::ConfigError, "compare: no run directories given");
  std::vector<RunForecasts> runs;
  std::map<std::string, int> seen;
  for (const auto& d : run_dirs) {
    std::string name = std::filesystem::path(d).lexically_normal().filename().string();
    if (name.empty()) name = std::filesystem::path(d).lexically_normal().parent_path().filename().string();
    if (const int k = seen[name]++; k > 0) name += "#" + std::to_string(k + 1);
    runs.push_back(read_forecast_csv(std::filesystem::path(d) / "forecast.csv", name));
  }
  for (const auto& r : runs) {
    if (r.days.empty()) throw Error(ErrorCode::ParseError, r.name + ": forecast.csv has no rows");
    bool same = r.days.size() == runs.front().days.size();
    for (auto a = r.days.cbegin(), b = runs.front().days.cbegin(); same && a != r.days.end(); ++a, ++b)
      same = a->first == b->first && a->second.first.size() == b->second.first.size();
    if (!same) throw Error(ErrorCode::WindowMismatch, r.name + " and " + runs.front().name + " cover different test days");
  }
  const auto dir = detail::prepare_out_dir(out, opts.force);

  const auto T = static_cast<Eigen::Index>(runs.front().days.size());
  const auto n = static_cast<Eigen::Index>(runs.front().days.begin()->second.first.size());
  std::vector<Matrix> actual(runs.size()), forecast(runs.size()), loss(runs.size());
  CompareResult res;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    actual[k].resize(T, n);
    forecast[k].resize(T, n);
    Eigen::Index i = 0;
    for (const auto& [date, af] : runs[k].days) {
      actual[k].row(i) = Eigen::Map<const Eigen::RowVectorXd>(af.first.data(), n);
      forecast[k].row(i) = Eigen::Map<const Eigen::RowVectorXd>(af.second.data(), n);
      ++i;
    }
    loss[k] = (actual[k] - forecast[k]).cwiseAbs();
    res.names.push_back(runs[k].name);
    res.metrics.push_back(compute_metrics(actual[k], forecast[k]));
  }
  const auto R = static_cast<Eigen::Index>(runs.size());
  res.p_values = Matrix::Ones(R, R);
  nlohmann::json tests = nlohmann::json::array();
  for (Eigen::Index i = 0; i < R; ++i) {
    for (Eigen::Index j = 0; j < R; ++j) {
      const auto gw = gw_test(loss[static_cast<std::size_t>(i)], loss[static_cast<std::size_t>(j)]);
      res.p_values(i, j) = gw.p_value;
      tests.push_back({{"row", res.names[static_cast<std::size_t>(i)]},
                       {"column", res.names[static_cast<std::size_t>(j)]},
                       {"statistic", gw.statistic},
                       {"p_value", gw.p_value},
                       {"favors", gw.direction == GwDirection::FavorsB ? res.names[static_cast<std::size_t>(j)]
                                  : gw.direction == GwDirection::FavorsA ? res.names[static_cast<std::size_t>(i)]
                                                                        : std::string("none")},
                       {"degenerate", gw.degenerate},
                       {"regularized", gw.regularized}});
    }
  }

  std::ostringstream pcsv;
  pcsv << "model";
  for (const auto& nm : res.names) pcsv << ',' << nm;
  pcsv << '\n';
  for (Eigen::Index i = 0; i < R; ++i) {
    pcsv << res.names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < R; ++j) pcsv << ',' << detail::fmt_real(res.p_values(i, j));
    pcsv << '\n';
  }
  detail::write_text(dir / "gw_pvalues.csv", pcsv.str());

  std::ostringstream mcsv;
  mcsv << "metric";
  for (const auto& nm : res.names) mcsv << ',' << nm;
  mcsv << '\n';
  const std::pair<const char*, double MetricsReport::*> rows[] = {{"MAPE", &MetricsReport::mape},
                                                                   {"Median(APE)", &MetricsReport::median_ape},
                                                                   {"RMSE", &MetricsReport::rmse},
                                                                   {"MPE", &MetricsReport::mpe},
                                                                   {"Std(PE)", &MetricsReport::std_pe}};
  for (const auto& [label, field] : rows) {
    mcsv << label;
    for (const auto& m : res.metrics) mcsv << ',' << detail::fmt_real(m.*field);
    mcsv << '\n';
  }
  detail::write_text(dir / "metrics_table.csv", mcsv.str());

  nlohmann::json j;
  j["runs"] = res.names;
  j["test_days"] = T;
  nlohmann::json ms = nlohmann::json::object();
  for (std::size_t k = 0; k < runs.size(); ++k) ms[res.names[k]] = detail::metrics_json(res.metrics[k]);
  j["metrics"] = ms;
  j["gw_tests"] = tests;
  j["p_value_convention"] = "p[row][column]: one-sided p that the column run is more accurate than the row run";
  detail::write_text(dir / "compare.json", j.dump(2) + "\n");
  return res;
}

/// Writes the configured synthetic series as a timestamp,value CSV.
inline TimeSeries cmd_synth(const SynthParams& params, const std::string& out_file, const CommandOptions& opts) {
  if (out_file.empty()) throw Error(ErrorCode::ConfigError, "out: an output file is required (--out)");
  const std::filesystem::path path(out_file);
  if (std::filesystem::exists(path) && !opts.force)
    throw Error(ErrorCode::ConfigError, "out: " + out_file + " exists (use --force to overwrite)");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  TimeSeries series = synth_series(params);
  std::ostringstream text;
  write_series_csv(text, series);
  detail::write_text(path, text.str());
  return series;
}

}  // namespace randens::app
