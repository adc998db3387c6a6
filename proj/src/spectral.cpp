#include "thermodiff/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <string>

#include "thermodiff/error.hpp"

namespace thermodiff {

namespace {

constexpr double kPi = std::numbers::pi;
const std::complex<double> kI{0.0, 1.0};

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

void require_contained(const DerivedScales& s, const SpatialGrid& grid, double t) {
  const double needed = kContainmentSigmas * containment_sigma(s, t);
  if (grid.span() < needed) {
    throw Error(ErrorCode::GridTooSmall, "span",
                "grid span " + std::to_string(grid.span()) + " is below " +
                    std::to_string(needed) + " (40 sigma at t = " + std::to_string(t) + ")");
  }
}

}  // namespace

SpatialGrid SpatialGrid::make(Eigen::Index n_points, double span) {
  if (n_points < 16 || !is_power_of_two(n_points)) {
    throw Error(ErrorCode::InvalidGrid, "n_points", "n_points must be a power of two >= 16");
  }
  if (!(span > 0)) {
    throw Error(ErrorCode::NonPositiveParameter, "span", "span must be > 0");
  }
  return SpatialGrid(n_points, span);
}

Eigen::ArrayXd SpatialGrid::positions() const {
  return Eigen::ArrayXd::LinSpaced(n_points_, 0.0, static_cast<double>(n_points_ - 1)) *
             spacing() -
         0.5 * span_;
}

Eigen::ArrayXd SpatialGrid::wavenumbers() const {
  Eigen::ArrayXd k(n_points_);
  const double dk = 2.0 * kPi / span_;
  for (Eigen::Index m = 0; m < n_points_; ++m) {
    const Eigen::Index signed_m = m < n_points_ / 2 ? m : m - n_points_;
    k[m] = dk * static_cast<double>(signed_m);
  }
  return k;
}

Eigen::ArrayXd SpectralState::dispersion() const {
  return wavenumbers().square() * (scales.hbar / (2.0 * scales.mass));
}

double containment_sigma(const DerivedScales& s, double t) { return s.dx0 + s.dp * t / s.mass; }

std::complex<double> psi_closed_form(const DerivedScales& s, double x, double t) {
  if (!(t >= 0)) throw Error(ErrorCode::NegativeTime, "t", "time must be >= 0");
  const std::complex<double> width{s.dx0, s.dp * t / s.mass};
  // (2 pi width^2)^(-1/4) on the principal branch; Re(width) > 0 keeps
  // arg(width^2) inside (-pi, pi) so this equals (2 pi)^(-1/4) width^(-1/2).
  const std::complex<double> prefactor = std::pow(2.0 * kPi * width * width, -0.25);
  return prefactor * std::exp(-x * x / (4.0 * s.dx0 * width));
}

Eigen::VectorXcd psi_closed_form(const DerivedScales& s, const Eigen::ArrayXd& x, double t) {
  Eigen::VectorXcd out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out[j] = psi_closed_form(s, x[j], t);
  return out;
}

double pdf_closed_form(const DerivedScales& s, double x, double t) {
  if (!(t >= 0)) throw Error(ErrorCode::NegativeTime, "t", "time must be >= 0");
  const double drift = s.dp * t / s.mass;
  const double variance = s.dx0 * s.dx0 + drift * drift;
  return std::exp(-x * x / (2.0 * variance)) / std::sqrt(2.0 * kPi * variance);
}

Eigen::ArrayXd pdf_closed_form(const DerivedScales& s, const Eigen::ArrayXd& x, double t) {
  if (!(t >= 0)) throw Error(ErrorCode::NegativeTime, "t", "time must be >= 0");
  const double drift = s.dp * t / s.mass;
  const double variance = s.dx0 * s.dx0 + drift * drift;
  return (-x.square() / (2.0 * variance)).exp() / std::sqrt(2.0 * kPi * variance);
}

SpectralState spectral_initialize(const DerivedScales& s, const SpatialGrid& grid) {
  require_contained(s, grid, 0.0);

  const Eigen::Index n = grid.n_points();
  const Eigen::ArrayXd k = grid.wavenumbers();
  const double dk_spread = s.dp / s.hbar;

  // Momentum amplitude (2 pi / dk^2)^(1/4) exp(-k^2 / (4 dk^2)) with measure
  // dk / 2 pi. On the grid, x_j = -L/2 + j dx turns exp(i k_m x_j) into
  // (-1)^m exp(2 pi i m j / N), and dk / 2 pi = 1 / L, so
  //   psi_j = (N / L) * IDFT[ (-1)^m Phi(k_m) ]_j.
  const double amplitude = std::pow(2.0 * kPi / (dk_spread * dk_spread), 0.25);
  Eigen::VectorXcd spectrum(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    spectrum[m] = sign * amplitude * std::exp(-k[m] * k[m] / (4.0 * dk_spread * dk_spread));
  }

  Eigen::FFT<double> fft;
  Eigen::VectorXcd psi(n);
  fft.inv(psi, spectrum);
  psi *= static_cast<double>(n) / grid.span();

  return SpectralState{grid, std::move(psi), 0.0, s};
}

SpectralState spectral_evolve(const SpectralState& state, double t_target) {
  if (!(t_target >= state.time)) {
    throw Error(ErrorCode::BackwardEvolution, "t_target",
                "cannot evolve from t = " + std::to_string(state.time) + " back to " +
                    std::to_string(t_target));
  }
  require_contained(state.scales, state.grid, t_target);

  const double elapsed = t_target - state.time;
  const Eigen::ArrayXd omega = state.dispersion();

  Eigen::FFT<double> fft;
  Eigen::VectorXcd spectrum(state.amplitudes.size());
  fft.fwd(spectrum, state.amplitudes);
  for (Eigen::Index m = 0; m < spectrum.size(); ++m) {
    spectrum[m] *= std::exp(-kI * (omega[m] * elapsed));
  }
  Eigen::VectorXcd psi(spectrum.size());
  fft.inv(psi, spectrum);

  return SpectralState{state.grid, std::move(psi), t_target, state.scales};
}

GridMoments grid_moments(const SpectralState& state) {
  const Eigen::ArrayXd x = state.grid.positions();
  Eigen::ArrayXd density = state.amplitudes.array().abs2();
  const double dx = state.grid.spacing();

  // trapezoid weights: 1/2 at both ends
  Eigen::ArrayXd w = Eigen::ArrayXd::Constant(x.size(), dx);
  w[0] *= 0.5;
  w[w.size() - 1] *= 0.5;

  GridMoments m;
  m.norm = (w * density).sum();
  m.mean = (w * density * x).sum() / m.norm;
  m.variance = (w * density * (x - m.mean).square()).sum() / m.norm;
  return m;
}

}  // namespace thermodiff
