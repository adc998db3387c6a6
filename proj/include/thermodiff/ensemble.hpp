#pragma once

// Monte Carlo trajectories of the thermally diffusing particle.
//
// Path law: x_i(t) = x0_i + (p_i / m) t + W_i(t), with x0_i ~ N(0, dx0^2) and
// p_i ~ N(0, dp^2) drawn once per particle and W_i a Wiener path whose
// increments are exact N(0, 2 D dt) draws. The marginal variance is
// dx0^2 + (dp t / m)^2 + 2 D t = (dx0 + dp t / m)^2.

#include <Eigen/Core>

#include <cstdint>
#include <string_view>
#include <vector>

#include "thermodiff/entropy.hpp"
#include "thermodiff/units.hpp"

namespace thermodiff {

enum class Scheme { full, quantum_only, classical_only };

constexpr std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::full: return "full";
    case Scheme::quantum_only: return "quantum_only";
    case Scheme::classical_only: return "classical_only";
  }
  return "unknown";
}

struct TrajectoryEnsemble {
  DerivedScales scales;
  double dt = 0;
  Eigen::Index n_steps = 0;
  Eigen::Index n_particles = 0;
  Eigen::MatrixXd positions;  // n_particles x (n_steps + 1)
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::full;

  double time(Eigen::Index step) const { return static_cast<double>(step) * dt; }
};

struct EnsembleStats {
  Eigen::ArrayXd t;
  Eigen::ArrayXd mean;
  Eigen::ArrayXd variance;        // unbiased
  Eigen::ArrayXd standard_error;  // variance * sqrt(2 / (N - 1))
  Eigen::ArrayXd analytic_variance;
};

/// `workers == 0` uses the hardware concurrency. Output does not depend on it.
TrajectoryEnsemble sample_trajectories(const DerivedScales& scales, double dt, Eigen::Index n_steps,
                                       Eigen::Index n_particles, std::uint64_t seed, Scheme scheme,
                                       unsigned workers = 0);

/// Analytic marginal variance at times `t` for the given scheme.
Eigen::ArrayXd analytic_variance(const DerivedScales& scales, Scheme scheme,
                                 const Eigen::ArrayXd& t);

EnsembleStats ensemble_stats(const TrajectoryEnsemble& ensemble);

enum class EntropyEstimator { plugin_gaussian, nearest_neighbor };

constexpr std::string_view to_string(EntropyEstimator estimator) {
  return estimator == EntropyEstimator::plugin_gaussian ? "plugin_gaussian" : "nearest_neighbor";
}

/// Per-step entropy increments divided by dt, one point per n = 0..n_steps-1.
/// Each point carries a standard error.
std::vector<RateCurvePoint> rate_from_ensemble(const TrajectoryEnsemble& ensemble,
                                               EntropyEstimator estimator, int k = 4);

}  // namespace thermodiff
