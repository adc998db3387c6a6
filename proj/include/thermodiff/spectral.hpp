#pragma once

// Free-particle wavepacket on a periodic 1-D grid.
//
// Two independent routes to psi(x, t):
//   * the closed form obtained by completing the square,
//       psi = (2 pi (dx0 + i b)^2)^(-1/4) exp(-x^2 / (4 dx0 (dx0 + i b))),  b = dp t / m
//   * a discrete spectral propagator: the Gaussian momentum amplitude is
//     sampled on the conjugate grid, transformed back with kernel
//     exp(i (k x - w t)), w = hbar k^2 / (2 m).
// The free Hamiltonian is diagonal in k, so evolution is a single exact
// multiply; the only error left is sampling/aliasing, which the containment
// rule (span >= 40 sigma) keeps far below the test tolerances.

#include <Eigen/Core>

#include <complex>

#include "thermodiff/units.hpp"

namespace thermodiff {

/// Uniform periodic grid x_j = -L/2 + j L/N, N a power of two >= 16.
class SpatialGrid {
 public:
  static SpatialGrid make(Eigen::Index n_points, double span);

  Eigen::Index n_points() const { return n_points_; }
  double span() const { return span_; }
  double spacing() const { return span_ / static_cast<double>(n_points_); }
  double x(Eigen::Index j) const { return -0.5 * span_ + static_cast<double>(j) * spacing(); }

  Eigen::ArrayXd positions() const;
  /// Angular wavenumbers in FFT order: 0, 1, ..., N/2 - 1, -N/2, ..., -1 (times 2 pi / L).
  Eigen::ArrayXd wavenumbers() const;

 private:
  SpatialGrid(Eigen::Index n, double span) : n_points_(n), span_(span) {}
  Eigen::Index n_points_;
  double span_;
};

// Containment factor: grid span must cover this many sigma(t) = dx0 + dp t / m.
inline constexpr double kContainmentSigmas = 40.0;
inline constexpr Eigen::Index kDefaultGridPoints = Eigen::Index{1} << 14;

struct SpectralState {
  SpatialGrid grid;
  Eigen::VectorXcd amplitudes;
  double time = 0;
  DerivedScales scales;

  Eigen::ArrayXd wavenumbers() const { return grid.wavenumbers(); }
  /// w(k) = hbar k^2 / (2 m)
  Eigen::ArrayXd dispersion() const;
};

struct GridMoments {
  double norm = 0;
  double mean = 0;
  double variance = 0;
};

std::complex<double> psi_closed_form(const DerivedScales& s, double x, double t);
Eigen::VectorXcd psi_closed_form(const DerivedScales& s, const Eigen::ArrayXd& x, double t);

double pdf_closed_form(const DerivedScales& s, double x, double t);
Eigen::ArrayXd pdf_closed_form(const DerivedScales& s, const Eigen::ArrayXd& x, double t);

/// Width used by the containment rule, dx0 + dp t / m.
double containment_sigma(const DerivedScales& s, double t);

/// Builds the t = 0 state by inverse-transforming the Gaussian momentum
/// amplitude sampled on the grid's wavenumbers.
SpectralState spectral_initialize(const DerivedScales& s, const SpatialGrid& grid);

/// Exact one-shot propagation to `t_target` by the dispersion phase.
SpectralState spectral_evolve(const SpectralState& state, double t_target);

/// Trapezoidal moments of |psi|^2.
GridMoments grid_moments(const SpectralState& state);

}  // namespace thermodiff
