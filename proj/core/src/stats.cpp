#include "nonmarkov/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nonmarkov {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng RngSpec::make() const {
  const std::uint64_t a = splitmix64(master_seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ConfidenceInterval bootstrap_ci(std::size_t n_samples, const IndexStatistic& statistic,
                                double level, int n_resamples, Rng& rng) {
  if (n_samples < 2) throw std::invalid_argument("bootstrap needs at least two samples");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap level must be in (0, 1)");
  if (n_resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");

  std::uniform_int_distribution<std::size_t> pick(0, n_samples - 1);
  std::vector<std::size_t> indices(n_samples);
  std::vector<double> stats(static_cast<std::size_t>(n_resamples));
  for (auto& s : stats) {
    for (auto& i : indices) i = pick(rng);
    s = statistic(indices);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - level);
  ConfidenceInterval ci;
  ci.lower = quantile_sorted(stats, tail);
  ci.upper = quantile_sorted(stats, 1.0 - tail);
  ci.level = level;
  ci.n_resamples = n_resamples;
  return ci;
}

ConfidenceInterval bootstrap_ci(std::span<const double> samples,
                                const std::function<double(std::span<const double>)>& statistic,
                                double level, int n_resamples, Rng& rng) {
  std::vector<double> buffer(samples.size());
  return bootstrap_ci(
      samples.size(),
      [&](std::span<const std::size_t> idx) {
        for (std::size_t k = 0; k < idx.size(); ++k) buffer[k] = samples[idx[k]];
        return statistic(buffer);
      },
      level, n_resamples, rng);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double fitted_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fitted_slope: need >= 2 paired points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fitted_slope: x has no spread");
  return sxy / sxx;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need >= 2 paired points");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace nonmarkov
