#pragma once

// Seeded random streams, percentile bootstrap, and small regression helpers.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nonmarkov/quantum_state.hpp"

namespace nonmarkov {

std::uint64_t splitmix64(std::uint64_t x);

/// Identifies one independent random stream: a master seed plus a counter.
/// Streams are derived by hashing, so they do not depend on the order in
/// which workers ask for them.
struct RngSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  Rng make() const;
};

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return RngSpec{master_seed, stream_id}.make();
}

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.90;
  int n_resamples = 0;

  double width() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

inline constexpr double kDefaultCiLevel = 0.90;
inline constexpr int kDefaultResamples = 2000;

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

/// Statistic evaluated on one resample, given as indices into the original
/// sample (with repetition).
using IndexStatistic = std::function<double(std::span<const std::size_t>)>;

/// Percentile bootstrap over `n_samples` abstract samples. The statistic sees
/// index resamples, which lets it reduce arbitrary per-sample objects.
ConfidenceInterval bootstrap_ci(std::size_t n_samples, const IndexStatistic& statistic,
                                double level, int n_resamples, Rng& rng);

/// Percentile bootstrap for a scalar statistic over real samples.
ConfidenceInterval bootstrap_ci(std::span<const double> samples,
                                const std::function<double(std::span<const double>)>& statistic,
                                double level, int n_resamples, Rng& rng);

double mean(std::span<const double> xs);

/// Least-squares slope of y against x.
double fitted_slope(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation (average ranks for ties).
double spearman_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace nonmarkov
