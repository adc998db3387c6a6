#pragma once

#include <Eigen/Core>

#include "thermodiff/error.hpp"

namespace thermodiff {

inline constexpr int kDefaultNeighborOrder = 4;
inline constexpr Eigen::Index kMinEntropySamples = 100;

struct EntropyEstimate {
  double nats = 0;
  double standard_error = 0;
};

/// psi(n) for integer n >= 1: -gamma + H_{n-1}.
double digamma_int(long long n);

/// Kozachenko-Leonenko nearest-neighbour differential entropy in one
/// dimension:
///
///   h = psi(N) - psi(k) + ln 2 + (1/N) sum_i ln rho_i
///
/// where rho_i is the distance from sample i to its k-th nearest neighbour
/// and ln 2 is the log-volume of the unit interval ball [-1, 1]. Scaling every
/// sample by c shifts the estimate by exactly ln|c|. The reported standard
/// error is sd(ln rho_i) / sqrt(N), which ignores the weak dependence between
/// neighbouring rho_i.
///
/// Order k trades bias (small k) against variance (large k); k = 4 is the
/// usual choice for ~1e5 samples.
EntropyEstimate entropy_nn(const Eigen::Ref<const Eigen::ArrayXd>& samples,
                           int k = kDefaultNeighborOrder);

/// Plug-in estimate: Gaussian entropy of the unbiased sample variance.
/// SE = 1/2 sqrt(2 / (N - 1)).
EntropyEstimate entropy_plugin_gaussian(const Eigen::Ref<const Eigen::ArrayXd>& samples);

struct NormalityTest {
  double statistic = 0;
  double p_value = 0;
};

/// Jarque-Bera test: JB = N/6 (S^2 + (K - 3)^2 / 4), asymptotically chi^2
/// with two degrees of freedom, so p = exp(-JB / 2).
NormalityTest jarque_bera(const Eigen::Ref<const Eigen::ArrayXd>& samples);

}  // namespace thermodiff
