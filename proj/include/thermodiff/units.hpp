#pragma once

#include <cmath>
#include <optional>
#include <string_view>
#include <type_traits>

#include "thermodiff/constants.hpp"
#include "thermodiff/error.hpp"

namespace thermodiff {

enum class UnitSystem { natural, si };

constexpr std::string_view to_string(UnitSystem units) {
  return units == UnitSystem::natural ? "natural" : "si";
}

/// Mass, temperature and the two constants that set every other scale.
/// In natural units hbar and boltzmann are exactly 1.
template <typename Scalar>
struct BasicPhysicalParams {
  UnitSystem unit_system = UnitSystem::natural;
  Scalar mass = 1;
  Scalar temperature = 1;
  Scalar hbar = 1;
  Scalar boltzmann = 1;
};

/// The four scales everything downstream is written in terms of:
///   dp   = sqrt(k_B T m)          thermal momentum spread
///   dx0  = hbar / (2 dp)          minimum-uncertainty width
///   D    = hbar / (2 m)           classical diffusion constant
///   rate = 2 k_B T / hbar         entropy rate, nats per unit time
template <typename Scalar>
struct BasicDerivedScales {
  Scalar dp = 0;
  Scalar dx0 = 0;
  Scalar diffusion_const = 0;
  Scalar rate_exact = 0;
  Scalar mass = 0;
  Scalar hbar = 0;
};

enum class TimestepVerdict { good, marginal, violates_assumption_1 };

constexpr std::string_view to_string(TimestepVerdict verdict) {
  switch (verdict) {
    case TimestepVerdict::good: return "good";
    case TimestepVerdict::marginal: return "marginal";
    case TimestepVerdict::violates_assumption_1: return "violates_assumption_1";
  }
  return "unknown";
}

template <typename Scalar>
struct BasicTimestepReport {
  Scalar dt = 0;
  Scalar threshold = 0;
  Scalar ratio = 0;
  TimestepVerdict verdict = TimestepVerdict::good;
};

using PhysicalParams = BasicPhysicalParams<double>;
using DerivedScales = BasicDerivedScales<double>;
using TimestepReport = BasicTimestepReport<double>;

namespace detail {

template <typename Scalar>
void require_positive(Scalar value, const char* field) {
  // written so that NaN fails too
  if (!(value > Scalar(0))) {
    throw Error(ErrorCode::NonPositiveParameter, field,
                std::string(field) + " must be > 0");
  }
}

}  // namespace detail

/// Validated parameters. `hbar` and `boltzmann` default to CODATA 2018 in SI
/// mode and may not be given at all in natural mode.
template <typename Scalar = double>
BasicPhysicalParams<Scalar> make_params(UnitSystem units,
                                        std::type_identity_t<Scalar> temperature,
                                        std::type_identity_t<Scalar> mass,
                                        std::optional<std::type_identity_t<Scalar>> hbar = {},
                                        std::optional<std::type_identity_t<Scalar>> boltzmann = {}) {
  detail::require_positive(temperature, "temperature");
  detail::require_positive(mass, "mass");

  BasicPhysicalParams<Scalar> params;
  params.unit_system = units;
  params.temperature = temperature;
  params.mass = mass;

  if (units == UnitSystem::natural) {
    if (hbar || boltzmann) {
      throw Error(ErrorCode::ConstantsOverrideInNaturalUnits, hbar ? "hbar" : "boltzmann",
                  "hbar and boltzmann are fixed to 1 in natural units");
    }
    params.hbar = Scalar(1);
    params.boltzmann = Scalar(1);
  } else {
    params.hbar = hbar.value_or(Scalar(codata2018::hbar));
    params.boltzmann = boltzmann.value_or(Scalar(codata2018::boltzmann));
    detail::require_positive(params.hbar, "hbar");
    detail::require_positive(params.boltzmann, "boltzmann");
  }
  return params;
}

template <typename Scalar>
BasicDerivedScales<Scalar> derive_scales(const BasicPhysicalParams<Scalar>& params) {
  using std::sqrt;
  const Scalar thermal_energy = params.boltzmann * params.temperature;

  BasicDerivedScales<Scalar> scales;
  scales.dp = sqrt(thermal_energy * params.mass);
  scales.dx0 = params.hbar / (Scalar(2) * scales.dp);
  scales.diffusion_const = params.hbar / (Scalar(2) * params.mass);
  scales.rate_exact = Scalar(2) * thermal_energy / params.hbar;
  scales.mass = params.mass;
  scales.hbar = params.hbar;
  return scales;
}

// Decision thresholds on dt / (hbar / 2 k_B T). Advisory only.
inline constexpr double kTimestepGoodRatio = 0.01;
inline constexpr double kTimestepMarginalRatio = 0.1;

template <typename Scalar>
BasicTimestepReport<Scalar> validate_timestep(const BasicPhysicalParams<Scalar>& params,
                                              std::type_identity_t<Scalar> dt) {
  detail::require_positive(dt, "dt");

  BasicTimestepReport<Scalar> report;
  report.dt = dt;
  report.threshold = params.hbar / (Scalar(2) * params.boltzmann * params.temperature);
  report.ratio = dt / report.threshold;
  if (report.ratio <= Scalar(kTimestepGoodRatio)) {
    report.verdict = TimestepVerdict::good;
  } else if (report.ratio <= Scalar(kTimestepMarginalRatio)) {
    report.verdict = TimestepVerdict::marginal;
  } else {
    report.verdict = TimestepVerdict::violates_assumption_1;
  }
  return report;
}

}  // namespace thermodiff
