#include "thermodiff/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "thermodiff/entropy.hpp"

namespace thermodiff {

double digamma_int(long long n) {
  double harmonic = 0.0;
  for (long long j = n - 1; j >= 1; --j) harmonic += 1.0 / static_cast<double>(j);
  return -std::numbers::egamma + harmonic;
}

EntropyEstimate entropy_nn(const Eigen::Ref<const Eigen::ArrayXd>& samples, int k) {
  const Eigen::Index n = samples.size();
  if (n < kMinEntropySamples) {
    throw Error(ErrorCode::TooFewSamples, "samples",
                "nearest-neighbour entropy needs at least 100 samples");
  }
  if (k < 1 || k > 20) {
    throw Error(ErrorCode::InvalidNeighborOrder, "k", "neighbour order must be in [1, 20]");
  }

  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());

  // In sorted order the k nearest neighbours of x[i] are found by walking
  // outward from i and always taking the closer side.
  Eigen::ArrayXd log_rho(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index lo = i - 1;
    Eigen::Index hi = i + 1;
    double rho = 0.0;
    for (int found = 0; found < k; ++found) {
      const double left = lo >= 0 ? x[i] - x[lo] : INFINITY;
      const double right = hi < n ? x[hi] - x[i] : INFINITY;
      if (left <= right) {
        rho = left;
        --lo;
      } else {
        rho = right;
        ++hi;
      }
    }
    if (!(rho > 0.0)) {
      throw Error(ErrorCode::DegenerateSamples, "samples",
                  "zero k-th neighbour distance (repeated samples)");
    }
    log_rho[i] = std::log(rho);
  }

  const double mean_log = log_rho.mean();
  const double sd_log = std::sqrt((log_rho - mean_log).square().sum() / static_cast<double>(n - 1));

  EntropyEstimate out;
  out.nats = digamma_int(n) - digamma_int(k) + std::numbers::ln2 + mean_log;
  out.standard_error = sd_log / std::sqrt(static_cast<double>(n));
  return out;
}

EntropyEstimate entropy_plugin_gaussian(const Eigen::Ref<const Eigen::ArrayXd>& samples) {
  const Eigen::Index n = samples.size();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "samples", "need at least 2 samples");
  const double mean = samples.mean();
  const double var = (samples - mean).square().sum() / static_cast<double>(n - 1);
  return {gaussian_entropy(var), 0.5 * std::sqrt(2.0 / static_cast<double>(n - 1))};
}

NormalityTest jarque_bera(const Eigen::Ref<const Eigen::ArrayXd>& samples) {
  const Eigen::Index n = samples.size();
  if (n < 8) throw Error(ErrorCode::TooFewSamples, "samples", "Jarque-Bera needs at least 8 samples");
  const Eigen::ArrayXd centered = samples - samples.mean();
  const double m2 = centered.square().mean();
  if (!(m2 > 0.0)) {
    throw Error(ErrorCode::DegenerateSamples, "samples", "zero sample variance");
  }
  const double m3 = centered.cube().mean();
  const double m4 = centered.square().square().mean();
  const double skew = m3 / std::pow(m2, 1.5);
  const double excess = m4 / (m2 * m2) - 3.0;
  const double jb = static_cast<double>(n) / 6.0 * (skew * skew + 0.25 * excess * excess);
  return {jb, std::exp(-0.5 * jb)};
}

}  // namespace thermodiff
