#pragma once

#include <cmath>
#include <functional>
#include <iterator>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bindlab/dataset.hpp"
#include "bindlab/errors.hpp"
#include "bindlab/metrics.hpp"
#include "bindlab/mixture.hpp"
#include "bindlab/random.hpp"

namespace bindlab {

struct FitConfig {
  double learning_rate = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int max_epochs = 2000;
  int batch_size = 512;
  int early_stop_patience = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0 && adam_beta1 > 0 && adam_beta1 < 1 && adam_beta2 > 0 &&
          adam_beta2 < 1 && adam_epsilon > 0 && max_epochs > 0 && batch_size > 0 &&
          early_stop_patience > 0)) {
      throw ConfigurationError("fit configuration values must be positive (betas in (0, 1))");
    }
  }
};

struct EpochTrace {
  int epoch = 0;
  double train_jsd = 0.0;
  double val_jsd = 0.0;
  double best_val_jsd = 0.0;
  bool improved = false;
};

struct FitResult {
  MixtureParameters params;
  std::vector<EpochTrace> trace;
  int best_epoch = 0;
  bool stopped_early = false;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<EpochTrace> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<EpochTrace>& trace() const { return trace_; }

 private:
  std::vector<EpochTrace> trace_;
};

inline double mean_jsd(const MixtureParameters& p, const VariantSpec& v,
                       std::span<const DistributionRecord> records) {
  if (records.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : records) acc += jsd(predict_distribution(p, v, r.indices), r.probs);
  return acc / static_cast<double>(records.size());
}

// Mean JSD over `records` and its exact gradient in the flat parameter layout.
// Elements of the range must convert to const DistributionRecord&.
template <typename Records>
std::pair<double, std::vector<double>> mean_jsd_with_gradient(const MixtureParameters& p,
                                                              const VariantSpec& v,
                                                              const Records& records) {
  std::vector<double> grad(p.size(), 0.0);
  if (std::empty(records)) return {0.0, grad};
  const double scale = 1.0 / static_cast<double>(std::size(records));
  const auto n = static_cast<std::size_t>(p.n);
  std::vector<double> dp(n), dy(n);
  double loss = 0.0;
  for (const DistributionRecord& r : records) {
    const auto pred = predict_distribution(p, v, r.indices);
    loss += jsd(pred, r.probs);
    jsd_gradient(pred, r.probs, dp);
    const double inner = std::inner_product(pred.begin(), pred.end(), dp.begin(), 0.0);
    for (std::size_t j = 0; j < n; ++j) dy[j] = scale * pred[j] * (dp[j] - inner);
    logits_backward(p, v, r.indices, dy, grad);
  }
  return {loss * scale, grad};
}

namespace detail {

class Adam {
 public:
  Adam(std::size_t size, const FitConfig& cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

  void step(std::span<double> x, std::span<const double> grad, const std::vector<bool>& mask) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.adam_beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.adam_beta2, t_);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!mask[i]) continue;
      m_[i] = cfg_.adam_beta1 * m_[i] + (1.0 - cfg_.adam_beta1) * grad[i];
      v_[i] = cfg_.adam_beta2 * v_[i] + (1.0 - cfg_.adam_beta2) * grad[i] * grad[i];
      x[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.adam_epsilon);
    }
  }

 private:
  FitConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace detail

// Adam on minibatch mean JSD; one epoch is a pass over a seeded permutation of
// the training set. Returns the checkpoint with the lowest validation JSD.
inline FitResult fit_mixture(const DatasetSplit& split, const VariantSpec& variant,
                             const FitConfig& cfg,
                             std::optional<MixtureParameters> init = std::nullopt) {
  cfg.validate();
  if (split.train.empty()) throw DatasetError("training split is empty");
  const int n = split.train.front().n;
  variant.validate(n);

  MixtureParameters params = init ? *init : MixtureParameters::initial(n);
  params.validate();
  if (params.n != n) throw ConfigurationError("initial parameters disagree with the data on n");
  const auto mask = variant.trainable_mask(params);
  const auto& val = split.val.empty() ? split.train : split.val;

  FitResult result;
  result.params = params;
  double best = mean_jsd(params, variant, val);
  result.trace.push_back({0, mean_jsd(params, variant, split.train), best, best, true});
  if (!variant.trains_anything()) return result;

  std::vector<double> x = params.flatten();
  detail::Adam adam(x.size(), cfg);
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::reference_wrapper<const DistributionRecord>> batch;
  int stale = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(split.train[order[k]]);
      const auto current = MixtureParameters::unflatten(n, x);
      auto [loss, grad] = mean_jsd_with_gradient(current, variant, batch);
      if (!std::isfinite(loss)) {
        throw FitError("non-finite training loss at epoch " + std::to_string(epoch),
                       result.trace);
      }
      adam.step(x, grad, mask);
    }

    const auto current = MixtureParameters::unflatten(n, x);
    EpochTrace row{epoch, mean_jsd(current, variant, split.train),
                   mean_jsd(current, variant, val), best, false};
    if (!std::isfinite(row.train_jsd) || !std::isfinite(row.val_jsd)) {
      result.trace.push_back(row);
      throw FitError("non-finite loss at epoch " + std::to_string(epoch), result.trace);
    }
    if (row.val_jsd < best) {
      best = row.val_jsd;
      row.improved = true;
      result.params = current;
      result.best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
    }
    row.best_val_jsd = best;
    result.trace.push_back(row);
    if (stale >= cfg.early_stop_patience) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

}  // namespace bindlab
