#include "thermodiff/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "thermodiff/estimators.hpp"
#include "thermodiff/philox.hpp"

namespace thermodiff {

namespace {

// Counter layout: {step or kInitialStep, particle low, particle high, stream}.
constexpr std::uint32_t kInitialStep = 0xFFFFFFFFu;
constexpr std::uint32_t kIncrementStream = 0;
constexpr std::uint32_t kInitialStream = 1;

void fill_rows(Eigen::MatrixXd& positions, Eigen::Index first, Eigen::Index last,
               const DerivedScales& s, double dt, Scheme scheme, const philox::Key& key) {
  const Eigen::Index n_steps = positions.cols() - 1;
  const bool quantum = scheme != Scheme::classical_only;
  const bool classical = scheme != Scheme::quantum_only;
  const double velocity_scale = s.dp / s.mass;
  const double increment_sd = std::sqrt(2.0 * s.diffusion_const * dt);

  for (Eigen::Index i = first; i < last; ++i) {
    const auto id = static_cast<std::uint64_t>(i);
    const auto lo = static_cast<std::uint32_t>(id);
    const auto hi = static_cast<std::uint32_t>(id >> 32);

    double x0 = 0.0;
    double velocity = 0.0;
    if (quantum) {
      const auto [zx, zp] = philox::normal_pair({kInitialStep, lo, hi, kInitialStream}, key);
      x0 = s.dx0 * zx;
      velocity = velocity_scale * zp;
    }

    double wiener = 0.0;
    positions(i, 0) = x0;
    for (Eigen::Index step = 1; step <= n_steps; ++step) {
      if (classical) {
        const auto counter = static_cast<std::uint32_t>(step - 1);
        wiener += increment_sd * philox::normal_pair({counter, lo, hi, kIncrementStream}, key).first;
      }
      positions(i, step) = x0 + velocity * (static_cast<double>(step) * dt) + wiener;
    }
  }
}

}  // namespace

TrajectoryEnsemble sample_trajectories(const DerivedScales& scales, double dt, Eigen::Index n_steps,
                                       Eigen::Index n_particles, std::uint64_t seed, Scheme scheme,
                                       unsigned workers) {
  if (!(dt > 0)) throw Error(ErrorCode::NonPositiveDt, "dt", "time step must be > 0");
  if (n_steps < 1 || n_steps >= static_cast<Eigen::Index>(kInitialStep)) {
    throw Error(ErrorCode::TooFewSteps, "steps", "need 1 <= n_steps < 2^32 - 1");
  }
  if (n_particles < 2) {
    throw Error(ErrorCode::TooFewParticles, "particles", "need at least 2 particles");
  }
  if (scheme != Scheme::full && scheme != Scheme::quantum_only &&
      scheme != Scheme::classical_only) {
    throw Error(ErrorCode::InvalidScheme, "scheme", "unknown sampling scheme");
  }

  TrajectoryEnsemble ens;
  ens.scales = scales;
  ens.dt = dt;
  ens.n_steps = n_steps;
  ens.n_particles = n_particles;
  ens.seed = seed;
  ens.scheme = scheme;
  ens.positions.resize(n_particles, n_steps + 1);

  const philox::Key key = philox::key_from_seed(seed);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const Eigen::Index n_workers = std::min<Eigen::Index>(workers, n_particles);

  if (n_workers == 1) {
    fill_rows(ens.positions, 0, n_particles, scales, dt, scheme, key);
    return ens;
  }

  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  const Eigen::Index chunk = (n_particles + n_workers - 1) / n_workers;
  for (Eigen::Index w = 0; w < n_workers; ++w) {
    const Eigen::Index first = w * chunk;
    const Eigen::Index last = std::min(n_particles, first + chunk);
    if (first >= last) break;
    pool.emplace_back([&, first, last] { fill_rows(ens.positions, first, last, scales, dt, scheme, key); });
  }
  pool.clear();
  return ens;
}

Eigen::ArrayXd analytic_variance(const DerivedScales& scales, Scheme scheme,
                                 const Eigen::ArrayXd& t) {
  switch (scheme) {
    case Scheme::full: return variance_total(scales, t);
    case Scheme::quantum_only: return variance_quantum(scales, t);
    case Scheme::classical_only: return variance_classical(scales, t);
  }
  throw Error(ErrorCode::InvalidScheme, "scheme", "unknown sampling scheme");
}

EnsembleStats ensemble_stats(const TrajectoryEnsemble& ens) {
  const Eigen::Index columns = ens.n_steps + 1;
  const double n = static_cast<double>(ens.n_particles);

  EnsembleStats stats;
  stats.t = Eigen::ArrayXd::LinSpaced(columns, 0.0, static_cast<double>(ens.n_steps)) * ens.dt;
  stats.mean.resize(columns);
  stats.variance.resize(columns);
  for (Eigen::Index c = 0; c < columns; ++c) {
    const auto col = ens.positions.col(c).array();
    const double mean = col.mean();
    stats.mean[c] = mean;
    stats.variance[c] = (col - mean).square().sum() / (n - 1.0);
  }
  stats.standard_error = stats.variance * std::sqrt(2.0 / (n - 1.0));
  stats.analytic_variance = analytic_variance(ens.scales, ens.scheme, stats.t);
  return stats;
}

namespace {

std::vector<RateCurvePoint> plugin_rates(const TrajectoryEnsemble& ens) {
  const double n = static_cast<double>(ens.n_particles);
  std::vector<RateCurvePoint> points;
  points.reserve(static_cast<std::size_t>(ens.n_steps));

  Eigen::ArrayXd dev_prev = ens.positions.col(0).array() - ens.positions.col(0).mean();
  double var_prev = dev_prev.square().sum() / (n - 1.0);
  for (Eigen::Index step = 0; step < ens.n_steps; ++step) {
    const auto next = ens.positions.col(step + 1).array();
    Eigen::ArrayXd dev_next = next - next.mean();
    const double var_next = dev_next.square().sum() / (n - 1.0);

    const double rate = (gaussian_entropy(var_next) - gaussian_entropy(var_prev)) / ens.dt;

    // Delta method on 1/2 ln(V_{n+1} / V_n) with per-particle pairing, so
    // the strong correlation between consecutive columns is accounted for.
    const Eigen::ArrayXd e = dev_next.square() / var_next - dev_prev.square() / var_prev;
    const double sd_e = std::sqrt((e - e.mean()).square().sum() / (n - 1.0));
    const double se = sd_e / std::sqrt(n) / (2.0 * ens.dt);

    points.push_back({step, ens.dt, rate, RateMethod::conditional_increment, se});
    dev_prev = std::move(dev_next);
    var_prev = var_next;
  }
  return points;
}

std::vector<RateCurvePoint> nn_rates(const TrajectoryEnsemble& ens, int k) {
  std::vector<EntropyEstimate> h;
  h.reserve(static_cast<std::size_t>(ens.n_steps + 1));
  for (Eigen::Index c = 0; c <= ens.n_steps; ++c) {
    h.push_back(entropy_nn(ens.positions.col(c).array(), k));
  }
  std::vector<RateCurvePoint> points;
  points.reserve(static_cast<std::size_t>(ens.n_steps));
  for (Eigen::Index step = 0; step < ens.n_steps; ++step) {
    const auto& a = h[static_cast<std::size_t>(step)];
    const auto& b = h[static_cast<std::size_t>(step + 1)];
    const double se = std::hypot(a.standard_error, b.standard_error) / ens.dt;
    points.push_back({step, ens.dt, (b.nats - a.nats) / ens.dt, RateMethod::conditional_increment, se});
  }
  return points;
}

}  // namespace

std::vector<RateCurvePoint> rate_from_ensemble(const TrajectoryEnsemble& ens,
                                               EntropyEstimator estimator, int k) {
  if (ens.n_steps < 2) {
    throw Error(ErrorCode::TooFewSteps, "steps", "rate estimation needs n_steps >= 2");
  }
  return estimator == EntropyEstimator::plugin_gaussian ? plugin_rates(ens) : nn_rates(ens, k);
}

}  // namespace thermodiff
