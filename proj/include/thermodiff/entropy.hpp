#pragma once

// Closed-form variance schedule and entropy rates of the thermally diffusing
// free particle. Everything is in nats.
//
// The position at step n is Gaussian with standard deviation
//   sigma_n = dx0 + n dt dp / m,
// so the two rate constructions have the closed forms
//   conditional:  [h(X_{n+1}) - h(X_n)] / dt     = ln(1 + (dt v) / (dx0 + n dt v)) / dt
//   block:        [h(X_n) - h(X_0)] / (n dt)     = ln(1 + r n dt) / (n dt)
// with v = dp / m and r = v / dx0 = 2 k_B T / hbar. Since ln(1 + x) <= x
// both are bounded above by r and approach it as the elapsed time goes to 0.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

#include "thermodiff/error.hpp"
#include "thermodiff/units.hpp"

namespace thermodiff {

template <typename Scalar>
struct BasicVarianceBreakdown {
  Scalar quantum_static = 0;  // dx0^2
  Scalar quantum_drift = 0;   // (dp t / m)^2
  Scalar classical = 0;       // 2 D t = hbar t / m
  Scalar total = 0;           // sum of the three
  Scalar factored = 0;        // (dx0 + dp t / m)^2
};

enum class RateMethod { conditional_increment, block_average, exact };

constexpr std::string_view to_string(RateMethod method) {
  switch (method) {
    case RateMethod::conditional_increment: return "conditional_increment";
    case RateMethod::block_average: return "block_average";
    case RateMethod::exact: return "exact";
  }
  return "unknown";
}

template <typename Scalar>
struct BasicRateCurvePoint {
  std::int64_t n = 0;
  Scalar dt = 0;
  Scalar rate = 0;
  RateMethod method = RateMethod::exact;
  // Set only by sampling-based estimators.
  std::optional<Scalar> standard_error;
};

template <typename Scalar>
struct BasicGridPoint {
  std::int64_t n = 0;
  Scalar dt = 0;
};

template <typename Scalar>
struct BasicBoundRow {
  BasicGridPoint<Scalar> point;
  Scalar rate_conditional = 0;
  Scalar rate_block = 0;
  Scalar rate_exact = 0;
  Scalar gap_conditional = 0;
  Scalar gap_block = 0;
};

using VarianceBreakdown = BasicVarianceBreakdown<double>;
using RateCurvePoint = BasicRateCurvePoint<double>;
using GridPoint = BasicGridPoint<double>;
using BoundRow = BasicBoundRow<double>;

namespace detail {

template <typename Scalar>
void require_time(Scalar t) {
  if (!(t >= Scalar(0))) {
    throw Error(ErrorCode::NegativeTime, "t", "time must be >= 0");
  }
}

template <typename Scalar>
void require_dt(Scalar dt) {
  if (!(dt > Scalar(0))) {
    throw Error(ErrorCode::NonPositiveDt, "dt", "time step must be > 0");
  }
}

template <typename Derived>
void require_times(const Eigen::ArrayBase<Derived>& t) {
  if (t.size() > 0 && !(t >= typename Derived::Scalar(0)).all()) {
    throw Error(ErrorCode::NegativeTime, "t", "every time must be >= 0");
  }
}

// dp / (m dx0); algebraically equal to rate_exact.
template <typename Scalar>
Scalar spread_rate(const BasicDerivedScales<Scalar>& s) {
  return s.dp / (s.mass * s.dx0);
}

// x - log1p(x) without cancellation for small x.
template <typename Scalar>
Scalar x_minus_log1p(Scalar x) {
  using std::abs;
  using std::log1p;
  if (abs(x) > Scalar(0.1)) return x - log1p(x);
  Scalar power = x * x;
  Scalar sum = 0;
  for (int k = 2; k < 60; ++k) {
    const Scalar term = power / Scalar(k);
    sum += (k % 2 == 0) ? term : -term;
    if (abs(term) <= std::numeric_limits<Scalar>::epsilon() * abs(sum)) break;
    power *= x;
  }
  return sum;
}

}  // namespace detail

template <typename Scalar>
Scalar variance_quantum(const BasicDerivedScales<Scalar>& s, std::type_identity_t<Scalar> t) {
  detail::require_time(t);
  const Scalar drift = s.dp * t / s.mass;
  return s.dx0 * s.dx0 + drift * drift;
}

template <typename Scalar>
Scalar variance_classical(const BasicDerivedScales<Scalar>& s, std::type_identity_t<Scalar> t) {
  detail::require_time(t);
  return Scalar(2) * s.diffusion_const * t;
}

template <typename Scalar>
BasicVarianceBreakdown<Scalar> variance_total(const BasicDerivedScales<Scalar>& s,
                                              std::type_identity_t<Scalar> t) {
  detail::require_time(t);
  const Scalar drift = s.dp * t / s.mass;
  BasicVarianceBreakdown<Scalar> v;
  v.quantum_static = s.dx0 * s.dx0;
  v.quantum_drift = drift * drift;
  v.classical = Scalar(2) * s.diffusion_const * t;
  v.total = v.quantum_static + v.quantum_drift + v.classical;
  v.factored = (s.dx0 + drift) * (s.dx0 + drift);
  return v;
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> variance_quantum(
    const BasicDerivedScales<typename Derived::Scalar>& s, const Eigen::ArrayBase<Derived>& t) {
  detail::require_times(t);
  return s.dx0 * s.dx0 + (t * (s.dp / s.mass)).square();
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> variance_classical(
    const BasicDerivedScales<typename Derived::Scalar>& s, const Eigen::ArrayBase<Derived>& t) {
  detail::require_times(t);
  return (2 * s.diffusion_const) * t;
}

/// Total variance, three components summed, over an array of times.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> variance_total(
    const BasicDerivedScales<typename Derived::Scalar>& s, const Eigen::ArrayBase<Derived>& t) {
  detail::require_times(t);
  return s.dx0 * s.dx0 + (t * (s.dp / s.mass)).square() + (2 * s.diffusion_const) * t;
}

/// Differential entropy of a Gaussian with the given variance: 1/2 ln(2 pi e v).
template <typename Scalar>
Scalar gaussian_entropy(Scalar variance) {
  if (!(variance > Scalar(0))) {
    throw Error(ErrorCode::NonPositiveVariance, "variance", "variance must be > 0");
  }
  using std::log;
  const Scalar two_pi_e = Scalar(2) * std::numbers::pi_v<Scalar> * std::numbers::e_v<Scalar>;
  return Scalar(0.5) * log(two_pi_e * variance);
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> gaussian_entropy(
    const Eigen::ArrayBase<Derived>& variance) {
  using Scalar = typename Derived::Scalar;
  if (variance.size() > 0 && !(variance > Scalar(0)).all()) {
    throw Error(ErrorCode::NonPositiveVariance, "variance", "every variance must be > 0");
  }
  const Scalar two_pi_e = Scalar(2) * std::numbers::pi_v<Scalar> * std::numbers::e_v<Scalar>;
  return Scalar(0.5) * (two_pi_e * variance).log();
}

template <typename Scalar>
BasicRateCurvePoint<Scalar> rate_conditional(const BasicDerivedScales<Scalar>& s, std::int64_t n,
                                             std::type_identity_t<Scalar> dt) {
  if (n < 0) throw Error(ErrorCode::NegativeIndex, "n", "step index must be >= 0");
  detail::require_dt(dt);
  using std::log1p;
  const Scalar step = dt * s.dp / s.mass;
  const Scalar width = s.dx0 + Scalar(n) * step;
  return {n, dt, log1p(step / width) / dt, RateMethod::conditional_increment, std::nullopt};
}

template <typename Scalar>
BasicRateCurvePoint<Scalar> rate_block(const BasicDerivedScales<Scalar>& s, std::int64_t n,
                                       std::type_identity_t<Scalar> dt) {
  if (n < 1) throw Error(ErrorCode::IndexBelowOne, "n", "block average needs n >= 1");
  detail::require_dt(dt);
  using std::log1p;
  const Scalar elapsed = Scalar(n) * dt;
  const Scalar rate = log1p(detail::spread_rate(s) * elapsed) / elapsed;
  return {n, dt, rate, RateMethod::block_average, std::nullopt};
}

template <typename Scalar>
BasicRateCurvePoint<Scalar> rate_exact(const BasicDerivedScales<Scalar>& s) {
  return {0, Scalar(0), s.rate_exact, RateMethod::exact, std::nullopt};
}

/// Block rate as a function of elapsed time n dt, continued to its limit
/// (the exact rate) at n dt = 0. Used by grid reports where n = 0 is allowed.
template <typename Scalar>
Scalar block_rate_continued(const BasicDerivedScales<Scalar>& s, std::int64_t n, Scalar dt) {
  if (n == 0) {
    detail::require_dt(dt);
    return detail::spread_rate(s);
  }
  return rate_block(s, n, dt).rate;
}

/// rate_exact - rate_conditional, evaluated without cancellation.
template <typename Scalar>
Scalar gap_conditional(const BasicDerivedScales<Scalar>& s, std::int64_t n, std::type_identity_t<Scalar> dt) {
  if (n < 0) throw Error(ErrorCode::NegativeIndex, "n", "step index must be >= 0");
  detail::require_dt(dt);
  const Scalar step = dt * s.dp / s.mass;
  const Scalar width = s.dx0 + Scalar(n) * step;
  const Scalar u = step / width;
  const Scalar lead = step * (Scalar(n) * step) / (s.dx0 * width);
  return (lead + detail::x_minus_log1p(u)) / dt;
}

/// rate_exact - block_rate_continued, evaluated without cancellation.
template <typename Scalar>
Scalar gap_block_continued(const BasicDerivedScales<Scalar>& s, std::int64_t n, Scalar dt) {
  if (n == 0) {
    detail::require_dt(dt);
    return Scalar(0);
  }
  if (n < 1) throw Error(ErrorCode::IndexBelowOne, "n", "block average needs n >= 1");
  detail::require_dt(dt);
  const Scalar elapsed = Scalar(n) * dt;
  return detail::x_minus_log1p(detail::spread_rate(s) * elapsed) / elapsed;
}

/// Evaluates both estimators and their gaps to the exact rate over a grid.
/// Errors carry the index of the failing grid entry.
template <typename Scalar>
std::vector<BasicBoundRow<Scalar>> bound_report(const BasicDerivedScales<Scalar>& s,
                                                std::span<const BasicGridPoint<Scalar>> grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "grid", "grid must not be empty");

  std::vector<BasicBoundRow<Scalar>> rows;
  rows.reserve(grid.size());
  const Scalar exact = s.rate_exact;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& p = grid[i];
    try {
      BasicBoundRow<Scalar> row;
      row.point = p;
      row.rate_conditional = rate_conditional(s, p.n, p.dt).rate;
      row.rate_block = block_rate_continued(s, p.n, p.dt);
      row.rate_exact = exact;
      row.gap_conditional = gap_conditional(s, p.n, p.dt);
      row.gap_block = gap_block_continued(s, p.n, p.dt);
      rows.push_back(row);
    } catch (const Error& e) {
      throw Error(e.code(), e.subject(), "grid[" + std::to_string(i) + "]: " + e.what(), i);
    }
  }
  return rows;
}

template <typename Scalar>
std::vector<BasicBoundRow<Scalar>> bound_report(const BasicDerivedScales<Scalar>& s,
                                                const std::vector<BasicGridPoint<Scalar>>& grid) {
  return bound_report(s, std::span<const BasicGridPoint<Scalar>>(grid));
}

}  // namespace thermodiff
