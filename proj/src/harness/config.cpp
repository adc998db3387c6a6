#include "thermodiff/harness/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace thermodiff::harness {

namespace {

const std::vector<std::pair<std::string, Command>> kCommands = {
    {"scales", Command::scales}, {"variance", Command::variance}, {"rates", Command::rates},
    {"evolve", Command::evolve}, {"sample", Command::sample},     {"estimate", Command::estimate},
    {"sweep", Command::sweep},   {"accept", Command::accept},
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(const std::string& flag, const std::string& value,
                            const std::string& expected, const std::string& fix) {
  throw UsageError{flag, "--" + flag + ": invalid value '" + value + "' (" + expected + ")", fix};
}

double parse_double(const std::string& flag, const std::string& text) {
  const std::string s = trim(text);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    bad_value(flag, text, "expected a number", "pass a decimal value, e.g. --" + flag + " 1e-3");
  }
  return value;
}

long long parse_int(const std::string& flag, const std::string& text) {
  const std::string s = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    bad_value(flag, text, "expected an integer", "pass a whole number, e.g. --" + flag + " 100");
  }
  return value;
}

std::uint64_t parse_seed(const std::string& flag, const std::string& text) {
  const std::string s = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    bad_value(flag, text, "expected an unsigned 64-bit integer", "pass e.g. --seed 12345");
  }
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& flag, const std::string& text, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse(flag, item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

void require_positive(const std::string& flag, double value, const std::string& example) {
  if (!(value > 0)) {
    throw UsageError{flag, "--" + flag + " must be > 0 (got " + format_double(value) + ")",
                     "pass a positive value, e.g. --" + flag + " " + example};
  }
}

bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

void validate(const RunConfig& c) {
  require_positive("temperature", c.temperature, "1");
  require_positive("mass", c.mass, "1");
  if (c.units == UnitSystem::natural && (c.hbar || c.boltzmann)) {
    const std::string flag = c.hbar ? "hbar" : "boltzmann";
    throw UsageError{flag, "--" + flag + " cannot be overridden in natural units (fixed to 1)",
                     "drop --" + flag + " or add --units si"};
  }
  if (c.hbar) require_positive("hbar", *c.hbar, "1.054571817e-34");
  if (c.boltzmann) require_positive("boltzmann", *c.boltzmann, "1.380649e-23");

  require_positive("dt", c.dt, "1e-3");
  const long long min_steps = c.command == Command::estimate ? 2 : 1;
  if (c.steps < min_steps) {
    throw UsageError{"steps", "--steps must be >= " + std::to_string(min_steps) + " (got " +
                                  std::to_string(c.steps) + ")",
                     "pass e.g. --steps 10"};
  }
  if (c.particles < 2) {
    throw UsageError{"particles", "--particles must be >= 2 (got " + std::to_string(c.particles) + ")",
                     "pass e.g. --particles 10000"};
  }
  if (c.grid_points < 16 || !is_power_of_two(c.grid_points)) {
    throw UsageError{"grid-points", "--grid-points must be a power of two >= 16 (got " +
                                        std::to_string(c.grid_points) + ")",
                     "pass e.g. --grid-points 16384"};
  }
  require_positive("grid-span-sigmas", c.grid_span_sigmas, "40");
  if (c.grid_span) require_positive("grid-span", *c.grid_span, "60");
  if (c.k < 1 || c.k > 20) {
    throw UsageError{"k", "--k must be in [1, 20] (got " + std::to_string(c.k) + ")", "pass e.g. --k 4"};
  }
  if (c.t_list.empty()) {
    throw UsageError{"t-list", "--t-list must not be empty", "pass e.g. --t-list 0,1,2"};
  }
  for (double t : c.t_list) {
    if (!(t >= 0)) {
      throw UsageError{"t-list", "--t-list entries must be >= 0 (got " + format_double(t) + ")",
                       "pass non-negative times, e.g. --t-list 0,1,2"};
    }
  }
  if (c.command == Command::sweep) {
    if (c.dt_list.empty()) {
      throw UsageError{"dt-list", "--dt-list must not be empty", "pass e.g. --dt-list 1e-2,1e-4,1e-6"};
    }
    if (c.n_list.empty() && c.ndt_list.empty()) {
      throw UsageError{"n-list", "--n-list (or --ndt-list) must not be empty",
                       "pass e.g. --n-list 0,1,10"};
    }
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string to_string(Command command) {
  for (const auto& [name, c] : kCommands) {
    if (c == command) return name;
  }
  return "unknown";
}

std::string to_string(Format format) { return format == Format::csv ? "csv" : "json"; }

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError{"config", "--config: cannot open '" + path + "'", "check the file path"};
  }
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError{"config", "--config: line " + std::to_string(lineno) + " is not key=value",
                       "write one key=value pair per line"};
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    entries.emplace_back(key, trim(std::string_view(line).substr(eq + 1)));
  }
  return entries;
}

std::optional<RunConfig> parse_run_config(const std::vector<std::string>& args,
                                          const std::optional<std::string>& seed_env,
                                          std::string* help) {
  // Pull out --config and turn its entries into leading flags so that
  // anything on the command line wins.
  std::vector<std::string> tokens;
  std::vector<std::string> rest;
  std::optional<std::string> command_from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        throw UsageError{"config", "--config needs a file path", "pass --config run.cfg"};
      }
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    for (const auto& [key, value] : read_config_file(path)) {
      if (key == "command") {
        command_from_file = value;
      } else {
        tokens.push_back("--" + key + "=" + value);
      }
    }
  }
  tokens.insert(tokens.end(), rest.begin(), rest.end());

  CLI::App app{"thermodiff: entropy rate of thermal diffusion of a free particle", "thermodiff"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string command_name;
  std::map<std::string, std::string> v;
  auto opt = [&](const std::string& name, const std::string& desc) {
    return app.add_option("--" + name, v[name], desc);
  };

  app.add_option("command", command_name,
                 "scales | variance | rates | evolve | sample | estimate | sweep | accept");
  opt("units", "natural | si (default natural)");
  opt("temperature", "temperature (K in si)");
  opt("mass", "particle mass (kg in si)");
  opt("hbar", "reduced Planck constant override (si only)");
  opt("boltzmann", "Boltzmann constant override (si only)");
  opt("dt", "time step");
  opt("steps", "number of time steps");
  opt("particles", "ensemble size");
  opt("seed", "64-bit seed (default from THERMODIFF_SEED or 314159)");
  opt("workers", "worker threads, 0 = all cores");
  opt("scheme", "full | quantum_only | classical_only");
  opt("dump", "sample output: stats | ensemble");
  opt("grid-points", "spectral grid points (power of two)");
  opt("grid-span-sigmas", "grid span in units of dx0 + dp t/m at the largest t");
  opt("grid-span", "absolute grid span (overrides --grid-span-sigmas)");
  app.add_option("--t-list,--t", v["t-list"], "comma-separated times");
  opt("dt-list", "sweep: comma-separated time steps");
  opt("n-list", "sweep: comma-separated step indices");
  opt("ndt-list", "sweep: comma-separated n*dt values (replaces --n-list)");
  opt("estimator", "plugin | nn");
  opt("k", "nearest-neighbour order");
  opt("output", "output file (default stdout)");
  opt("format", "csv | json");

  std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    if (help) *help = app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError{"", e.what(), "run 'thermodiff --help' for the list of flags"};
  }

  RunConfig c;
  if (command_name.empty() && command_from_file) command_name = *command_from_file;
  if (command_name.empty()) {
    throw UsageError{"command", "missing command", "run e.g. 'thermodiff scales --format json'"};
  }
  const auto found = std::find_if(kCommands.begin(), kCommands.end(),
                                  [&](const auto& p) { return p.first == command_name; });
  if (found == kCommands.end()) {
    throw UsageError{"command", "unknown command '" + command_name + "'",
                     "use one of scales, variance, rates, evolve, sample, estimate, sweep, accept"};
  }
  c.command = found->second;

  if (seed_env && !seed_env->empty()) c.seed = parse_seed("seed", *seed_env);

  auto given = [&](const std::string& name) { return app.count("--" + name) > 0; };

  if (given("units")) {
    if (v["units"] == "natural") {
      c.units = UnitSystem::natural;
    } else if (v["units"] == "si") {
      c.units = UnitSystem::si;
    } else {
      bad_value("units", v["units"], "natural or si", "pass --units natural or --units si");
    }
  }
  if (given("temperature")) c.temperature = parse_double("temperature", v["temperature"]);
  if (given("mass")) c.mass = parse_double("mass", v["mass"]);
  if (given("hbar")) c.hbar = parse_double("hbar", v["hbar"]);
  if (given("boltzmann")) c.boltzmann = parse_double("boltzmann", v["boltzmann"]);
  if (given("dt")) c.dt = parse_double("dt", v["dt"]);
  if (given("steps")) c.steps = parse_int("steps", v["steps"]);
  if (given("particles")) c.particles = parse_int("particles", v["particles"]);
  if (given("seed")) c.seed = parse_seed("seed", v["seed"]);
  if (given("workers")) {
    const long long w = parse_int("workers", v["workers"]);
    if (w < 0) bad_value("workers", v["workers"], "must be >= 0", "pass e.g. --workers 4");
    c.workers = static_cast<unsigned>(w);
  }
  if (given("scheme")) {
    const auto& s = v["scheme"];
    if (s == "full") {
      c.scheme = Scheme::full;
    } else if (s == "quantum_only" || s == "quantum-only") {
      c.scheme = Scheme::quantum_only;
    } else if (s == "classical_only" || s == "classical-only") {
      c.scheme = Scheme::classical_only;
    } else {
      bad_value("scheme", s, "full, quantum_only or classical_only", "pass e.g. --scheme full");
    }
  }
  if (given("dump")) {
    if (v["dump"] == "stats") {
      c.dump = Dump::stats;
    } else if (v["dump"] == "ensemble") {
      c.dump = Dump::ensemble;
    } else {
      bad_value("dump", v["dump"], "stats or ensemble", "pass --dump stats or --dump ensemble");
    }
  }
  if (given("grid-points")) c.grid_points = parse_int("grid-points", v["grid-points"]);
  if (given("grid-span-sigmas")) c.grid_span_sigmas = parse_double("grid-span-sigmas", v["grid-span-sigmas"]);
  if (given("grid-span")) c.grid_span = parse_double("grid-span", v["grid-span"]);
  if (given("t-list")) c.t_list = parse_list<double>("t-list", v["t-list"], parse_double);
  if (given("dt-list")) c.dt_list = parse_list<double>("dt-list", v["dt-list"], parse_double);
  if (given("n-list")) c.n_list = parse_list<long long>("n-list", v["n-list"], parse_int);
  if (given("ndt-list")) c.ndt_list = parse_list<double>("ndt-list", v["ndt-list"], parse_double);
  if (given("estimator")) {
    const auto& e = v["estimator"];
    if (e == "plugin" || e == "plugin_gaussian") {
      c.estimator = EntropyEstimator::plugin_gaussian;
    } else if (e == "nn" || e == "nearest_neighbor") {
      c.estimator = EntropyEstimator::nearest_neighbor;
    } else {
      bad_value("estimator", e, "plugin or nn", "pass --estimator plugin or --estimator nn");
    }
  }
  if (given("k")) c.k = static_cast<int>(parse_int("k", v["k"]));
  if (given("output")) c.output = v["output"];

  switch (c.command) {
    case Command::scales:
    case Command::evolve:
    case Command::accept: c.format = Format::json; break;
    default: c.format = Format::csv; break;
  }
  if (given("format")) {
    if (v["format"] == "csv") {
      c.format = Format::csv;
    } else if (v["format"] == "json") {
      c.format = Format::json;
    } else {
      bad_value("format", v["format"], "csv or json", "pass --format csv or --format json");
    }
  }

  validate(c);
  return c;
}

std::vector<std::pair<std::string, std::string>> serialize(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", to_string(c.command));
  kv.emplace_back("units", std::string(thermodiff::to_string(c.units)));
  kv.emplace_back("temperature", format_double(c.temperature));
  kv.emplace_back("mass", format_double(c.mass));
  if (c.hbar) kv.emplace_back("hbar", format_double(*c.hbar));
  if (c.boltzmann) kv.emplace_back("boltzmann", format_double(*c.boltzmann));
  kv.emplace_back("dt", format_double(c.dt));
  kv.emplace_back("steps", std::to_string(c.steps));
  kv.emplace_back("particles", std::to_string(c.particles));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("workers", std::to_string(c.workers));
  kv.emplace_back("scheme", std::string(thermodiff::to_string(c.scheme)));
  kv.emplace_back("dump", c.dump == Dump::stats ? "stats" : "ensemble");
  kv.emplace_back("grid-points", std::to_string(c.grid_points));
  kv.emplace_back("grid-span-sigmas", format_double(c.grid_span_sigmas));
  if (c.grid_span) kv.emplace_back("grid-span", format_double(*c.grid_span));
  kv.emplace_back("t-list", join(c.t_list));
  kv.emplace_back("dt-list", join(c.dt_list));
  kv.emplace_back("n-list", join(c.n_list));
  kv.emplace_back("ndt-list", join(c.ndt_list));
  kv.emplace_back("estimator", c.estimator == EntropyEstimator::plugin_gaussian ? "plugin" : "nn");
  kv.emplace_back("k", std::to_string(c.k));
  kv.emplace_back("output", c.output);
  kv.emplace_back("format", to_string(c.format));
  // empty values mean "default", which is what an absent key gives back
  std::erase_if(kv, [](const auto& entry) { return entry.second.empty(); });
  return kv;
}

}  // namespace thermodiff::harness
