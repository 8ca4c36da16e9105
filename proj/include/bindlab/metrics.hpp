#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bindlab/errors.hpp"

namespace bindlab {

inline constexpr double kDistributionTolerance = 1e-6;
inline constexpr double kReportFloor = 1e-12;

inline bool is_distribution(std::span<const double> p, double tol = kDistributionTolerance) {
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) return false;
    total += v;
  }
  return !p.empty() && std::abs(total - 1.0) <= tol;
}

namespace detail {

inline void check_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ContractError("distributions differ in length (" + std::to_string(p.size()) + " vs " +
                        std::to_string(q.size()) + ")");
  }
  if (!is_distribution(p) || !is_distribution(q)) {
    throw ContractError("input is not a probability distribution");
  }
}

}  // namespace detail

// Jensen-Shannon divergence with base-2 logarithms, in [0, 1]. Zero entries
// contribute nothing.
inline double jsd(std::span<const double> p, std::span<const double> q) {
  detail::check_pair(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) acc += p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) acc += q[i] * std::log2(q[i] / m);
  }
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

inline double jss(std::span<const double> p, std::span<const double> q) { return 1.0 - jsd(p, q); }

// d jsd(p, q) / d p_i = 0.5 * log2(p_i / m_i). Entries with p_i = 0 get 0,
// which is exact once chained through a softmax.
inline void jsd_gradient(std::span<const double> p, std::span<const double> q,
                         std::span<double> out) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] > 0.0 ? 0.5 * std::log2(p[i] / (0.5 * (p[i] + q[i]))) : 0.0;
  }
}

enum class KlDirection {
  Forward,  // sum p ln(p / q)
  Reverse,  // sum q ln(q / p)
};

// KL divergence in nats; +infinity when the numerator distribution has mass
// where the other has none.
inline double kl(std::span<const double> p, std::span<const double> q,
                 KlDirection direction = KlDirection::Forward) {
  detail::check_pair(p, q);
  if (direction == KlDirection::Reverse) std::swap(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(acc, 0.0);
}

// KL with both arguments floored at kReportFloor inside the logarithm; stays
// finite for reporting.
inline double kl_smoothed(std::span<const double> p, std::span<const double> q,
                          KlDirection direction = KlDirection::Forward) {
  detail::check_pair(p, q);
  if (direction == KlDirection::Reverse) std::swap(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i] * std::log(std::max(p[i], kReportFloor) / std::max(q[i], kReportFloor));
  }
  return acc;
}

}  // namespace bindlab
