#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bindlab/dataset.hpp"
#include "bindlab/errors.hpp"
#include "bindlab/metrics.hpp"
#include "bindlab/mixture.hpp"
#include "bindlab/random.hpp"

namespace bindlab {

inline constexpr int kDefaultBootstrap = 2000;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
};

struct MetricSummary {
  double mean = 0.0;
  Interval ci;
};

struct EvalReport {
  std::string variant;
  int t_entity = 0;
  std::size_t records = 0;
  MetricSummary jss;
  MetricSummary kl_tp;  // KL(target || prediction), nats
  MetricSummary kl_pt;  // KL(prediction || target), nats
};

// Linear-interpolated sample quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Percentile bootstrap (95%) of the mean of `values`.
inline MetricSummary bootstrap_mean(std::span<const double> values, int iterations,
                                    std::uint64_t seed) {
  MetricSummary out;
  if (values.empty()) return out;
  double total = 0.0;
  for (double v : values) total += v;
  out.mean = total / static_cast<double>(values.size());
  if (iterations <= 0) {
    out.ci = {out.mean, out.mean};
    return out;
  }
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(iterations));
  for (auto& m : means) {
    double acc = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) acc += values[rng.below(values.size())];
    m = acc / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  out.ci = {quantile_sorted(means, 0.025), quantile_sorted(means, 0.975)};
  return out;
}

struct RecordMetrics {
  std::vector<double> jss, kl_tp, kl_pt;
};

inline RecordMetrics per_record_metrics(const MixtureParameters& params,
                                        const VariantSpec& variant,
                                        std::span<const DistributionRecord> records) {
  RecordMetrics out;
  for (const auto& r : records) {
    const auto pred = predict_distribution(params, variant, r.indices);
    out.jss.push_back(jss(r.probs, pred));
    out.kl_tp.push_back(kl_smoothed(r.probs, pred, KlDirection::Forward));
    out.kl_pt.push_back(kl_smoothed(r.probs, pred, KlDirection::Reverse));
  }
  return out;
}

inline EvalReport evaluate(const MixtureParameters& params, const VariantSpec& variant,
                           std::span<const DistributionRecord> records,
                           int bootstrap_iters = kDefaultBootstrap, std::uint64_t seed = 0) {
  if (records.empty()) throw DatasetError("evaluation needs a non-empty test set");
  params.validate();
  variant.validate(params.n);
  for (const auto& r : records) {
    r.validate();
    if (r.n != params.n) throw DatasetError("test record n disagrees with the parameters");
  }
  const auto metrics = per_record_metrics(params, variant, records);
  EvalReport report;
  report.variant = variant.name;
  report.t_entity = records.front().t_entity;
  report.records = records.size();
  report.jss = bootstrap_mean(metrics.jss, bootstrap_iters, derive_seed(seed, 1));
  report.kl_tp = bootstrap_mean(metrics.kl_tp, bootstrap_iters, derive_seed(seed, 2));
  report.kl_pt = bootstrap_mean(metrics.kl_pt, bootstrap_iters, derive_seed(seed, 3));
  return report;
}

}  // namespace bindlab
