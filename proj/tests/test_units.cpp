#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "thermodiff/units.hpp"

using namespace thermodiff;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Params, NaturalUnitsFixConstantsToOne) {
  const auto p = make_params(UnitSystem::natural, 1.0, 1.0);
  EXPECT_EQ(p.hbar, 1.0);
  EXPECT_EQ(p.boltzmann, 1.0);
}

TEST(Params, SiDefaultsToCodata2018) {
  const auto p = make_params(UnitSystem::si, 300.0, 9.1093837e-31);
  EXPECT_EQ(p.hbar, 1.054571817e-34);
  EXPECT_EQ(p.boltzmann, 1.380649e-23);
}

TEST(Params, Rejections) {
  try {
    make_params(UnitSystem::natural, -1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveParameter);
    EXPECT_EQ(e.subject(), "temperature");
  }
  EXPECT_THROW(make_params(UnitSystem::natural, 1.0, 0.0), Error);
  EXPECT_THROW(make_params(UnitSystem::natural, 1.0, std::nan("")), Error);
  try {
    make_params(UnitSystem::natural, 1.0, 1.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConstantsOverrideInNaturalUnits);
  }
  EXPECT_THROW(make_params(UnitSystem::si, 1.0, 1.0, -1.0), Error);
}

TEST(Scales, UnitParameters) {
  const auto s = derive_scales(make_params(UnitSystem::natural, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(s.dp, 1.0);
  EXPECT_DOUBLE_EQ(s.dx0, 0.5);
  EXPECT_DOUBLE_EQ(s.diffusion_const, 0.5);
  EXPECT_DOUBLE_EQ(s.rate_exact, 2.0);
}

TEST(Scales, TemperatureFour) {
  const auto s = derive_scales(make_params(UnitSystem::natural, 4.0, 1.0));
  EXPECT_DOUBLE_EQ(s.dp, 2.0);
  EXPECT_DOUBLE_EQ(s.dx0, 0.25);
  EXPECT_DOUBLE_EQ(s.rate_exact, 8.0);
  EXPECT_DOUBLE_EQ(s.dp / (s.mass * s.dx0), s.rate_exact);
}

TEST(Scales, RateIsLinearInTemperature) {
  EXPECT_DOUBLE_EQ(derive_scales(make_params(UnitSystem::natural, 2.5, 1.0)).rate_exact, 5.0);
}

// reference values from a 50-digit evaluation with CODATA 2018 hbar, k_B
TEST(Scales, SiElectronAtRoomTemperature) {
  const auto s = derive_scales(make_params(UnitSystem::si, 300.0, 9.1093837e-31));
  EXPECT_LE(rel(s.dp, 6.142522648559295e-26), 1e-14);
  EXPECT_LE(rel(s.dx0, 8.584191523065411e-10), 1e-14);
  EXPECT_LE(rel(s.diffusion_const, 5.788381803480295e-5), 1e-14);
  EXPECT_LE(rel(s.rate_exact, 7.855220352432384e13), 1e-14);
}

TEST(Scales, MinimumUncertaintyAndRateIdentity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> exponent(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double T = std::pow(10.0, exponent(rng));
    const double m = std::pow(10.0, exponent(rng));
    const auto s = derive_scales(make_params(UnitSystem::natural, T, m));
    ASSERT_LE(rel(s.dx0 * s.dp, 0.5), 1e-14) << T << " " << m;
    ASSERT_LE(rel(s.dp / (m * s.dx0), s.rate_exact), 1e-12) << T << " " << m;
    ASSERT_LE(rel(s.diffusion_const, 0.5 / m), 1e-15);
  }
}

TEST(Scales, DoubleAndLongDoubleAgree) {
  const auto sd = derive_scales(make_params<double>(UnitSystem::si, 300.0, 9.1093837015e-31));
  const auto sl = derive_scales(make_params<long double>(UnitSystem::si, 300.0L, 9.1093837015e-31L));
  EXPECT_LE(rel(sd.dx0, static_cast<double>(sl.dx0)), 1e-14);
}

TEST(Timestep, Classification) {
  const auto p = make_params(UnitSystem::natural, 1.0, 1.0);
  auto r = validate_timestep(p, 1e-4);
  EXPECT_DOUBLE_EQ(r.threshold, 0.5);
  EXPECT_DOUBLE_EQ(r.ratio, 2e-4);
  EXPECT_EQ(r.verdict, TimestepVerdict::good);

  r = validate_timestep(p, 0.05);
  EXPECT_DOUBLE_EQ(r.ratio, 0.1);
  EXPECT_EQ(r.verdict, TimestepVerdict::marginal);

  EXPECT_EQ(validate_timestep(p, 0.005).verdict, TimestepVerdict::good);
  EXPECT_EQ(validate_timestep(p, 0.0051).verdict, TimestepVerdict::marginal);
  EXPECT_EQ(validate_timestep(p, 1.0).verdict, TimestepVerdict::violates_assumption_1);
  EXPECT_THROW(validate_timestep(p, 0.0), Error);
}
