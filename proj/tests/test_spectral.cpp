#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "thermodiff/entropy.hpp"
#include "thermodiff/spectral.hpp"

using namespace thermodiff;

namespace {

DerivedScales natural() { return derive_scales(make_params(UnitSystem::natural, 1.0, 1.0)); }

SpatialGrid grid_for(const DerivedScales& s, double t, Eigen::Index n = kDefaultGridPoints) {
  return SpatialGrid::make(n, kContainmentSigmas * containment_sigma(s, t));
}

}  // namespace

TEST(ClosedForm, PeakAmplitudeAtOrigin) {
  const auto psi = psi_closed_form(natural(), 0.0, 0.0);
  EXPECT_NEAR(psi.real(), 0.8932438417380023, 1e-15);
  EXPECT_EQ(psi.imag(), 0.0);
  EXPECT_NEAR(pdf_closed_form(natural(), 0.0, 0.0), 0.7978845608028654, 1e-15);
}

TEST(ClosedForm, DensityIsModulusSquared) {
  const auto s = natural();
  for (double t : {0.0, 0.3, 1.0, 5.0}) {
    for (double x : {-3.0, -0.2, 0.0, 1.1, 4.0}) {
      EXPECT_NEAR(std::norm(psi_closed_form(s, x, t)), pdf_closed_form(s, x, t), 1e-15);
    }
    const double v = variance_quantum(s, t);
    EXPECT_NEAR(pdf_closed_form(s, 0.0, t), 1.0 / std::sqrt(2 * std::numbers::pi * v), 1e-15);
  }
}

TEST(ClosedForm, EvenInX) {
  const auto s = natural();
  for (double x : {0.1, 0.7, 2.5}) {
    const auto a = psi_closed_form(s, x, 0.8), b = psi_closed_form(s, -x, 0.8);
    EXPECT_EQ(a, b);
  }
}

TEST(ClosedForm, DensityIntegratesToOneWithExpectedVariance) {
  const auto s = natural();
  const int n = 200000;
  const double L = 80.0, h = L / n;
  double norm = 0, second = 0;
  for (int i = 0; i <= n; ++i) {
    const double x = -L / 2 + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double p = pdf_closed_form(s, x, 1.0);
    norm += w * p * h;
    second += w * p * x * x * h;
  }
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_NEAR(second, 1.25, 1e-10);
}

TEST(ClosedForm, ArrayOverloadsMatchScalar) {
  const auto s = natural();
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(11, -3.0, 3.0);
  const Eigen::VectorXcd psi = psi_closed_form(s, x, 0.6);
  const Eigen::ArrayXd pdf = pdf_closed_form(s, x, 0.6);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(std::abs(psi[i] - psi_closed_form(s, x[i], 0.6)), 0.0, 1e-15);
    EXPECT_NEAR(pdf[i], pdf_closed_form(s, x[i], 0.6), 1e-15);
  }
}

TEST(Grid, Validation) {
  EXPECT_THROW(SpatialGrid::make(1000, 10.0), Error);
  EXPECT_THROW(SpatialGrid::make(8, 10.0), Error);
  EXPECT_THROW(SpatialGrid::make(1024, 0.0), Error);
  const auto g = SpatialGrid::make(16, 8.0);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(g.x(0), -4.0);
  EXPECT_DOUBLE_EQ(g.x(8), 0.0);
  const Eigen::ArrayXd k = g.wavenumbers();
  EXPECT_EQ(k[0], 0.0);
  EXPECT_NEAR(k[1], 2 * std::numbers::pi / 8.0, 1e-15);
  EXPECT_NEAR(k[15], -2 * std::numbers::pi / 8.0, 1e-15);
  EXPECT_NEAR(k[8], -std::numbers::pi / 0.5, 1e-15);
}

TEST(Initialize, NormAndMean) {
  const auto s = natural();
  const auto state = spectral_initialize(s, SpatialGrid::make(4096, 40.0));
  const auto m = grid_moments(state);
  EXPECT_NEAR(m.norm, 1.0, 1e-10);
  EXPECT_NEAR(m.mean, 0.0, 1e-10 * s.dx0);
  EXPECT_NEAR(m.variance, 0.25, 0.25 * 1e-6);
  EXPECT_EQ(state.time, 0.0);
}

TEST(Initialize, MatchesClosedFormAtZero) {
  const auto s = natural();
  const auto grid = SpatialGrid::make(4096, 40.0);
  const auto state = spectral_initialize(s, grid);
  const Eigen::VectorXcd exact = psi_closed_form(s, grid.positions(), 0.0);
  EXPECT_LE((state.amplitudes - exact).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Initialize, GridTooSmall) {
  try {
    spectral_initialize(natural(), SpatialGrid::make(1024, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooSmall);
  }
}

TEST(Evolve, IdentityPropagation) {
  const auto s = natural();
  const auto state = spectral_initialize(s, grid_for(s, 1.0, 4096));
  const auto same = spectral_evolve(state, 0.0);
  EXPECT_LE((same.amplitudes - state.amplitudes).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolve, VarianceAtUnitTime) {
  const auto s = natural();
  const auto state = spectral_evolve(spectral_initialize(s, grid_for(s, 1.0)), 1.0);
  const auto m = grid_moments(state);
  EXPECT_LE(std::abs(m.variance - 1.25) / 1.25, 1e-6);
  EXPECT_NEAR(m.norm, 1.0, 1e-8);
  EXPECT_EQ(state.time, 1.0);
}

TEST(Evolve, Rejections) {
  const auto s = natural();
  const auto state = spectral_initialize(s, grid_for(s, 1.0, 4096));
  EXPECT_THROW(spectral_evolve(state, 3.0), Error);
  const auto later = spectral_evolve(state, 0.5);
  try {
    spectral_evolve(later, 0.25);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackwardEvolution);
  }
}

TEST(Evolve, AgreesWithClosedForm) {
  const auto s = natural();
  const auto grid = grid_for(s, 2.0);
  const auto initial = spectral_initialize(s, grid);
  const auto m0 = grid_moments(initial);
  for (double t : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    const auto state = spectral_evolve(initial, t);
    const Eigen::VectorXcd exact = psi_closed_form(s, grid.positions(), t);
    EXPECT_LE((state.amplitudes - exact).cwiseAbs().maxCoeff(), 1e-8) << t;
    const auto m = grid_moments(state);
    EXPECT_LE(std::abs(m.norm - m0.norm), 1e-10) << t;
    EXPECT_LE(std::abs(m.variance - variance_quantum(s, t)) / variance_quantum(s, t), 1e-6) << t;
  }
}

TEST(Evolve, StepwiseEqualsDirect) {
  const auto s = natural();
  const auto initial = spectral_initialize(s, grid_for(s, 1.0, 4096));
  const auto direct = spectral_evolve(initial, 1.0);
  const auto stepped = spectral_evolve(spectral_evolve(initial, 0.4), 1.0);
  EXPECT_LE((direct.amplitudes - stepped.amplitudes).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolve, OtherParameters) {
  const auto s = derive_scales(make_params(UnitSystem::natural, 3.0, 0.4));
  const auto grid = grid_for(s, 0.7);
  const auto state = spectral_evolve(spectral_initialize(s, grid), 0.7);
  const Eigen::VectorXcd exact = psi_closed_form(s, grid.positions(), 0.7);
  EXPECT_LE((state.amplitudes - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff(), 1e-8);
}
