#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "isap/error.hpp"

namespace isap {

/// A Monte Carlo estimate with batch-means error bars.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  double tau_int = 0.5;
  std::size_t batches = 0;
  std::string warning;
};

/// Integrated autocorrelation time with Sokal's automatic window: the
/// smallest M with M >= c * tau(M).
inline double integrated_autocorrelation(const std::vector<double>& x, double c = 5.0) {
  const std::size_t n = x.size();
  if (n < 2) return 0.5;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - mean;
  double c0 = 0.0;
  for (double v : d) c0 += v * v;
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 0.5;
  double tau = 0.5;
  const std::size_t max_lag = std::min<std::size_t>(n / 2, 5000);
  for (std::size_t t = 1; t < max_lag; ++t) {
    double ct = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) ct += d[i] * d[i + t];
    ct /= static_cast<double>(n);
    tau += ct / c0;
    if (static_cast<double>(t) >= c * tau) break;
  }
  return std::max(tau, 0.5);
}

inline constexpr std::size_t kDefaultBatches = 64;
inline constexpr std::size_t kMinBatches = 16;

/// Batch-means estimate of the mean of a time series. Trailing samples that do
/// not fill a batch are dropped from the error estimate but not from the mean.
inline Estimate batch_means(const std::vector<double>& x, std::size_t batches = kDefaultBatches) {
  if (batches < kMinBatches) throw PreconditionError("batch_means: at least 16 batches required");
  if (x.size() < batches)
    throw NumericalDiagnostic("insufficient batches: " + std::to_string(x.size()) + " samples for " +
                              std::to_string(batches) + " batches");
  Estimate e;
  e.samples = x.size();
  e.batches = batches;
  e.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const std::size_t size = x.size() / batches;
  std::vector<double> bm(batches);
  for (std::size_t b = 0; b < batches; ++b)
    bm[b] = std::accumulate(x.begin() + b * size, x.begin() + (b + 1) * size, 0.0) / static_cast<double>(size);
  const double bmean = std::accumulate(bm.begin(), bm.end(), 0.0) / static_cast<double>(batches);
  double var = 0.0;
  for (double v : bm) var += (v - bmean) * (v - bmean);
  var /= static_cast<double>(batches - 1);
  e.std_error = std::sqrt(var / static_cast<double>(batches));
  e.tau_int = integrated_autocorrelation(x);
  return e;
}

/// Self-normalised estimate sum(f w) / sum(w) of a reweighted series. Errors
/// come from the spread of per-batch ratios.
inline Estimate weighted_batch_means(const std::vector<double>& f, const std::vector<double>& w,
                                     std::size_t batches = kDefaultBatches) {
  if (f.size() != w.size()) throw PreconditionError("weighted_batch_means: size mismatch");
  if (batches < kMinBatches) throw PreconditionError("weighted_batch_means: at least 16 batches required");
  if (f.size() < batches) throw NumericalDiagnostic("insufficient batches");
  Estimate e;
  e.samples = f.size();
  e.batches = batches;
  double sfw = 0.0, sw = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sfw += f[i] * w[i], sw += w[i];
  if (!(sw > 0)) throw NumericalDiagnostic("weighted_batch_means: weights vanish");
  e.mean = sfw / sw;
  const std::size_t size = f.size() / batches;
  double var = 0.0;
  std::size_t used = 0;
  std::vector<double> rb;
  for (std::size_t b = 0; b < batches; ++b) {
    double a = 0.0, c = 0.0;
    for (std::size_t i = b * size; i < (b + 1) * size; ++i) a += f[i] * w[i], c += w[i];
    if (c > 0) rb.push_back(a / c), ++used;
  }
  if (used < 2) throw NumericalDiagnostic("weighted_batch_means: too few batches with weight");
  const double rmean = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(used);
  for (double r : rb) var += (r - rmean) * (r - rmean);
  var /= static_cast<double>(used - 1);
  e.std_error = std::sqrt(var / static_cast<double>(used));
  std::vector<double> fw(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fw[i] = f[i] * w[i];
  e.tau_int = integrated_autocorrelation(fw);
  return e;
}

/// Inverse-variance weighted combination of independent estimates.
inline Estimate merge_estimates(const std::vector<Estimate>& parts) {
  if (parts.empty()) throw PreconditionError("merge_estimates: nothing to merge");
  Estimate out;
  double wsum = 0.0, acc = 0.0;
  bool all_exact = true;
  for (const auto& p : parts) all_exact = all_exact && p.std_error == 0.0;
  for (const auto& p : parts) {
    double w = all_exact ? 1.0 : (p.std_error > 0 ? 1.0 / (p.std_error * p.std_error) : 0.0);
    acc += w * p.mean;
    wsum += w;
    out.samples += p.samples;
    out.batches += p.batches;
    out.tau_int = std::max(out.tau_int, p.tau_int);
  }
  if (wsum <= 0) throw NumericalDiagnostic("merge_estimates: no usable weights");
  out.mean = acc / wsum;
  out.std_error = all_exact ? 0.0 : std::sqrt(1.0 / wsum);
  return out;
}

}  // namespace isap
