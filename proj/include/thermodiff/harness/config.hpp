#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thermodiff/ensemble.hpp"
#include "thermodiff/units.hpp"

namespace thermodiff::harness {

enum class Command { scales, variance, rates, evolve, sample, estimate, sweep, accept };
enum class Format { csv, json };
enum class Dump { stats, ensemble };

inline constexpr std::uint64_t kDefaultSeed = 314159;
inline constexpr const char* kSeedEnvVar = "THERMODIFF_SEED";

struct RunConfig {
  Command command = Command::scales;

  UnitSystem units = UnitSystem::natural;
  double temperature = 1.0;
  double mass = 1.0;
  std::optional<double> hbar;
  std::optional<double> boltzmann;

  double dt = 1e-3;
  long long steps = 10;
  long long particles = 10000;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;
  Scheme scheme = Scheme::full;
  Dump dump = Dump::stats;

  long long grid_points = 16384;
  double grid_span_sigmas = 40.0;
  std::optional<double> grid_span;
  std::vector<double> t_list{1.0};

  std::vector<double> dt_list{1e-2, 1e-4, 1e-6};
  std::vector<long long> n_list{0, 1, 10, 100, 1000};
  std::vector<double> ndt_list;

  EntropyEstimator estimator = EntropyEstimator::plugin_gaussian;
  int k = 4;

  std::string output;
  Format format = Format::csv;
};

/// Bad flags or flag values. Maps to exit code 2.
struct UsageError {
  std::string flag;
  std::string message;
  std::string fix;
};

/// Parses argv-style arguments (program name excluded). A `--config FILE`
/// argument loads flat key=value lines first; explicit flags override them.
/// `seed_env` is the value of THERMODIFF_SEED, which only replaces the
/// built-in default seed.
/// Returns nullopt when help was requested (text written to `help`).
std::optional<RunConfig> parse_run_config(const std::vector<std::string>& args,
                                          const std::optional<std::string>& seed_env,
                                          std::string* help = nullptr);

/// Reads a flat key=value file ('#' starts a comment).
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

/// Canonical key=value serialization, in a fixed order. Feeding these lines
/// back as a config file reproduces the run.
std::vector<std::pair<std::string, std::string>> serialize(const RunConfig& config);

std::string to_string(Command command);
std::string to_string(Format format);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace thermodiff::harness
