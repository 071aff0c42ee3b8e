#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randens/calendar.hpp"
#include "randens/csv_io.hpp"
#include "randens/ensemble.hpp"
#include "randens/error.hpp"
#include "randens/rolling.hpp"
#include "randens/synth.hpp"
#include "randens/time_series.hpp"

namespace randens::app {

inline constexpr int kConfigVersion = 1;

struct SweepGrid {
  std::vector<std::size_t> m;
  std::vector<double> alpha_max;
  std::vector<double> parameter;
  std::size_t repeats = 1;

  bool empty() const { return m.empty() && alpha_max.empty() && parameter.empty(); }
};

/// Parsed and validated run configuration.
struct RunConfig {
  std::optional<std::string> csv_path;
  CsvSchema schema;
  std::optional<SynthParams> synth;
  std::optional<std::string> exclusions_path;
  Date test_start{};
  Date test_end{};
  int horizon = 1;
  bool weekday_pairing = true;
  ModelSpec model;
  std::uint64_t seed = 1;
  bool keep_member_forecasts = true;
  SweepGrid sweep;
  std::string out;
  /// The effective JSON document (after CLI overrides), echoed in manifests.
  nlohmann::json document;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, field + ": " + msg);
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_fail(path + key, "has the wrong type");
  }
}

inline Date get_date(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) config_fail(key, "is required");
  try {
    return parse_date(j.at(key).get<std::string>());
  } catch (const std::exception& e) {
    config_fail(key, e.what());
  }
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? p : (base / path).string();
}

inline SynthParams parse_synth(const nlohmann::json& s) {
  SynthParams p;
  if (s.contains("start")) p.start = get_date(s, "start");
  p.days = get_field<std::size_t>(s, "days", "data.synth.", p.days);
  if (s.contains("weekday_amplitudes")) {
    const auto w = get_field<std::vector<double>>(s, "weekday_amplitudes", "data.synth.", {});
    if (w.size() != 7) config_fail("data.synth.weekday_amplitudes", "needs 7 values (Monday..Sunday)");
    std::copy(w.begin(), w.end(), p.weekday_amplitudes.begin());
  }
  if (s.contains("daily_shape")) p.daily_shape = get_field<std::vector<double>>(s, "daily_shape", "data.synth.", {});
  p.yearly_amplitude = get_field<double>(s, "yearly_amplitude", "data.synth.", p.yearly_amplitude);
  p.noise_sd = get_field<double>(s, "noise_sd", "data.synth.", p.noise_sd);
  p.base = get_field<double>(s, "base", "data.synth.", p.base);
  p.seed = get_field<std::uint64_t>(s, "seed", "data.synth.", p.seed);
  if (p.days < 14) config_fail("data.synth.days", "must be >= 14");
  if (!(p.noise_sd >= 0.0)) config_fail("data.synth.noise_sd", "must be >= 0");
  return p;
}

}  // namespace detail

/// Parses a version-1 run configuration. Relative paths resolve against `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {},
                                  bool require_window = true) {
  using detail::config_fail;
  using detail::get_field;
  if (!j.is_object()) config_fail("config", "must be a JSON object");
  if (!j.contains("version")) config_fail("version", "is required");
  if (get_field<int>(j, "version", "", 0) != kConfigVersion)
    config_fail("version", "unsupported (expected " + std::to_string(kConfigVersion) + ")");

  RunConfig cfg;
  cfg.document = j;

  if (!j.contains("data") || !j.at("data").is_object()) config_fail("data", "is required");
  const auto& data = j.at("data");
  const bool has_csv = data.contains("csv"), has_synth = data.contains("synth");
  if (has_csv == has_synth) config_fail("data", "needs exactly one of 'csv' or 'synth'");
  if (has_csv) {
    cfg.csv_path = detail::resolve(base_dir, get_field<std::string>(data, "csv", "data.", ""));
    cfg.schema.timestamp_column = get_field<std::string>(data, "timestamp_column", "data.", cfg.schema.timestamp_column);
    cfg.schema.value_column = get_field<std::string>(data, "value_column", "data.", cfg.schema.value_column);
    cfg.schema.timezone = get_field<std::string>(data, "timezone", "data.", cfg.schema.timezone);
    cfg.schema.cycle_length = get_field<std::size_t>(data, "cycle_length", "data.", cfg.schema.cycle_length);
    try {
      parse_utc_offset(cfg.schema.timezone);
    } catch (const Error& e) {
      config_fail("data.timezone", e.what());
    }
  } else {
    cfg.synth = detail::parse_synth(data.at("synth"));
  }
  if (j.contains("exclusions"))
    cfg.exclusions_path = detail::resolve(base_dir, get_field<std::string>(j, "exclusions", "", ""));

  if (require_window || j.contains("test_start") || j.contains("test_end")) {
    cfg.test_start = detail::get_date(j, "test_start");
    cfg.test_end = detail::get_date(j, "test_end");
    if (cfg.test_end < cfg.test_start) config_fail("test_end", "is before test_start");
  }
  cfg.horizon = get_field<int>(j, "horizon", "", 1);
  if (cfg.horizon < 1) config_fail("horizon", "must be >= 1");
  cfg.weekday_pairing = get_field<bool>(j, "weekday_pairing", "", true);
  cfg.seed = get_field<std::uint64_t>(j, "seed", "", 1);
  cfg.keep_member_forecasts = get_field<bool>(j, "keep_member_forecasts", "", true);
  cfg.out = get_field<std::string>(j, "out", "", "");

  const auto kind = get_field<std::string>(j, "model", "", "ensemble");
  if (kind == "ensemble") cfg.model.kind = ModelSpec::Kind::Ensemble;
  else if (kind == "naive") cfg.model.kind = ModelSpec::Kind::Naive;
  else if (kind == "randnn") cfg.model.kind = ModelSpec::Kind::Single;
  else config_fail("model", "must be 'ensemble', 'randnn' or 'naive'");

  cfg.model.base.m = get_field<std::size_t>(j, "m", "", 40);
  cfg.model.base.alpha_max = get_field<double>(j, "alpha_max", "", 70.0);
  cfg.model.members = get_field<std::size_t>(j, "M", "", 100);
  if (cfg.model.base.m < 1) config_fail("m", "must be >= 1");
  if (!(cfg.model.base.alpha_max > 0.0 && cfg.model.base.alpha_max < 90.0)) config_fail("alpha_max", "must lie in (0, 90)");
  if (cfg.model.members < 1) config_fail("M", "must be >= 1");

  if (j.contains("strategy")) {
    const auto& s = j.at("strategy");
    try {
      cfg.model.strategy.kind = parse_strategy(get_field<std::string>(s, "kind", "strategy.", "E1"));
    } catch (const Error& e) {
      config_fail("strategy.kind", e.what());
    }
    const double fallback = cfg.model.strategy.kind == Strategy::E1 ? cfg.model.base.alpha_max : 0.5;
    cfg.model.strategy.parameter = get_field<double>(s, "parameter", "strategy.", fallback);
    cfg.model.strategy.base_m = get_field<std::size_t>(s, "base_m", "strategy.", 0);
    cfg.model.strategy.reuse_template_biases = get_field<bool>(s, "reuse_template_biases", "strategy.", false);
  } else {
    cfg.model.strategy.kind = Strategy::E1;
    cfg.model.strategy.parameter = cfg.model.base.alpha_max;
  }
  if (cfg.model.kind == ModelSpec::Kind::Ensemble) {
    try {
      cfg.model.strategy.validate();
    } catch (const Error& e) {
      config_fail("strategy.parameter (" + std::string(parameter_name(cfg.model.strategy.kind)) + ")", e.what());
    }
  }

  if (j.contains("grid_search")) {
    const auto& g = j.at("grid_search");
    cfg.model.m_grid = get_field<std::vector<std::size_t>>(g, "m", "grid_search.", {});
    cfg.model.alpha_grid = get_field<std::vector<double>>(g, "alpha_max", "grid_search.", {});
    cfg.model.cv_folds = get_field<std::size_t>(g, "folds", "grid_search.", 5);
    if (cfg.model.m_grid.empty() || cfg.model.alpha_grid.empty())
      config_fail("grid_search", "needs non-empty 'm' and 'alpha_max' lists");
    if (cfg.model.cv_folds < 2) config_fail("grid_search.folds", "must be >= 2");
    for (double a : cfg.model.alpha_grid)
      if (!(a > 0.0 && a < 90.0)) config_fail("grid_search.alpha_max", "values must lie in (0, 90)");
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    cfg.sweep.m = get_field<std::vector<std::size_t>>(s, "m", "sweep.", {});
    cfg.sweep.alpha_max = get_field<std::vector<double>>(s, "alpha_max", "sweep.", {});
    cfg.sweep.parameter = get_field<std::vector<double>>(s, "parameter", "sweep.", {});
    cfg.sweep.repeats = get_field<std::size_t>(s, "repeats", "sweep.", 1);
    if (cfg.sweep.repeats < 1) config_fail("sweep.repeats", "must be >= 1");
    for (double a : cfg.sweep.alpha_max)
      if (!(a > 0.0 && a < 90.0)) config_fail("sweep.alpha_max", "values must lie in (0, 90)");
    for (double p : cfg.sweep.parameter) {
      DiversityStrategy probe = cfg.model.strategy;
      probe.parameter = p;
      try {
        probe.validate();
      } catch (const Error& e) {
        config_fail("sweep.parameter", e.what());
      }
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j, std::filesystem::path(path).parent_path());
}

/// Removes every cycle that falls on one of `dates`.
inline TimeSeries drop_dates(const TimeSeries& series, const std::vector<Date>& dates) {
  if (dates.empty()) return series;
  const std::set<Date> skip(dates.begin(), dates.end());
  std::vector<Timestamp> ts;
  std::vector<double> vals;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (skip.count(date_of(series.timestamps()[k]))) continue;
    ts.push_back(series.timestamps()[k]);
    vals.push_back(series.values()[k]);
  }
  return TimeSeries(std::move(ts), std::move(vals), series.cycle_length());
}

inline std::vector<Date> load_config_exclusions(const RunConfig& cfg) {
  return cfg.exclusions_path ? load_exclusions(*cfg.exclusions_path) : std::vector<Date>{};
}

inline TimeSeries load_series(const RunConfig& cfg) {
  const auto excluded = load_config_exclusions(cfg);
  if (cfg.csv_path) return load_csv(*cfg.csv_path, cfg.schema, excluded);
  return drop_dates(synth_series(*cfg.synth), excluded);
}

}  // namespace randens::app
