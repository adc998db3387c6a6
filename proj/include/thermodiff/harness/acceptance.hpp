#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermodiff/harness/config.hpp"
#include "thermodiff/units.hpp"

namespace thermodiff::harness {

/// One numeric comparison inside a criterion.
///   within:   |measured - target| <= tolerance
///   at_most:  measured <= target + tolerance
struct Check {
  enum class Kind { within, at_most };
  std::string name;
  Kind kind = Kind::within;
  double target = 0;
  double measured = 0;
  double tolerance = 0;
  bool pass = false;

  static Check within(std::string name, double measured, double target, double tolerance);
  static Check at_most(std::string name, double measured, double limit, double tolerance = 0.0);
};

struct CriterionResult {
  std::string id;
  std::string description;
  // summary taken from the governing check (first failure, else the tightest)
  double target = 0;
  double measured = 0;
  double tolerance = 0;
  bool pass = false;
  double runtime_s = 0;
  std::vector<Check> checks;
  std::string error;  // set when the criterion threw
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool pass = false;
};

struct AcceptanceOptions {
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;
  /// Applied to every DerivedScales the suite builds. Identity by default;
  /// tests use it to inject faults (e.g. a wrong diffusion constant).
  std::function<DerivedScales(const DerivedScales&)> scales_transform;
  /// Runs A8 (second pass with a different worker count, byte comparison).
  bool include_determinism = true;
};

AcceptanceReport run_acceptance(const AcceptanceOptions& options);

/// Report as JSON. Timing fields are `runtime_s` per criterion.
nlohmann::ordered_json to_json(const AcceptanceReport& report);

/// The report with timing fields removed, serialized. Two runs with the same
/// seed produce identical strings.
std::string numeric_fingerprint(const AcceptanceReport& report);

/// "[PASS] A1  exact-rate identity  measured=... target=... tol=..."
std::string summary_line(const CriterionResult& result);

}  // namespace thermodiff::harness
