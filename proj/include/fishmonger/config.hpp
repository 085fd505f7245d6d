#pragma once

// Run configuration: INI/TOML-style sections [curve], [cook], [engine],
// [oracle]. Command-line flags override file values, which override defaults.
//
//   [curve]
//   family = rational        ; rational | exponential | piecewise-linear | tabulated
//   scale = 1                ; rational
//   rate = 1                 ; exponential
//   knots = 0:0 1:0.5 4:1    ; piecewise-linear / tabulated
//   file = curve.csv         ; tabulated, relative to the config file
//
//   [cook]
//   type = 1                 ; true valuation q
//   policy = naive           ; naive | scripted
//   threshold = 1            ; naive threshold x (defaults to type)
//   script = decisions.txt   ; scripted
//
//   [engine]
//   rounds = 100000
//   seed = 1
//   burn_in = 10000
//   stride = 100
//   replications = 1
//
//   [oracle]
//   horizon = 4
//   grid = 3
//   budget = 5e7

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "fishmonger/engine.hpp"
#include "fishmonger/oracle.hpp"

namespace fishmonger {

struct RunConfig {
  nlohmann::json curve_spec;  // as written, for the manifest
  AcceptanceCurve curve = AcceptanceCurve::rational();

  double cook_type = 1.0;
  std::string policy = "naive";
  std::optional<double> threshold;
  std::filesystem::path script;

  std::size_t rounds = 100000;
  std::uint64_t seed = 1;
  std::size_t burn_in = 10000;
  std::size_t stride = 100;
  std::size_t replications = 1;
  double quadrature_tolerance = RewardCurve::kDefaultTolerance;

  std::size_t horizon = 4;
  std::size_t grid = 3;
  double budget = 5e7;

  GameConfig game() const;
  OracleConfig oracle() const;
  nlohmann::json to_json() const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> replications;
  std::optional<double> cook_type;
  std::optional<double> threshold;
};

// Throws ConfigError naming the offending field.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

// Fully resolved config in the same file format; reloading it reproduces the run.
std::string to_ini(const RunConfig& config);

}  // namespace fishmonger
