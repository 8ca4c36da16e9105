#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "bindlab/counterfactual.hpp"
#include "bindlab/errors.hpp"
#include "bindlab/metrics.hpp"
#include "bindlab/mixture.hpp"
#include "bindlab/random.hpp"

namespace bindlab {

inline constexpr int kDefaultSamplesPerTriple = 150;

// Mean next-token distribution over the n candidate groups for one index triple.
struct DistributionRecord {
  std::string task;
  std::string model_name;
  int layer = 0;
  int n = 0;
  int m = 0;
  int t_entity = 1;
  MechanismIndices indices;
  std::vector<double> probs;
  int n_samples = kDefaultSamplesPerTriple;
  bool synthetic = false;

  void validate() const {
    if (static_cast<int>(probs.size()) != n) {
      throw DatasetError("record probs has length " + std::to_string(probs.size()) +
                         ", expected n = " + std::to_string(n));
    }
    if (!is_distribution(probs)) throw DatasetError("record probs is not a distribution");
    for (int v : {indices.i_p, indices.i_l, indices.i_r}) {
      if (v < 1 || v > n) throw DatasetError("record index outside [1, n]");
    }
    if (n_samples < 1) throw DatasetError("record n_samples must be positive");
  }
};

struct DatasetSplit {
  std::vector<DistributionRecord> train;
  std::vector<DistributionRecord> val;
  std::vector<DistributionRecord> test;
  std::uint64_t split_seed = 0;

  std::size_t total() const { return train.size() + val.size() + test.size(); }
};

struct SplitSizes {
  std::size_t train, val, test;
};

// 70% train; the remainder halved between validation and test.
inline SplitSizes split_sizes(std::size_t total) {
  const auto train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(total)));
  const std::size_t val = (total - train) / 2;
  return {train, val, total - train - val};
}

// Merges duplicate triples by n_samples-weighted averaging, then shuffles with
// the seed and splits 70/15/15.
inline DatasetSplit assemble_dataset(const std::vector<DistributionRecord>& records, int t_entity,
                                     std::uint64_t seed = 0) {
  using Key = std::tuple<int, int, int>;
  std::map<Key, DistributionRecord> merged;
  int n = 0;
  for (const auto& r : records) {
    if (r.t_entity != t_entity) continue;
    r.validate();
    if (n == 0) n = r.n;
    if (r.n != n) {
      throw DatasetError("records disagree on n (" + std::to_string(n) + " vs " +
                         std::to_string(r.n) + ")");
    }
    const Key key{r.indices.i_p, r.indices.i_l, r.indices.i_r};
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, r);
      continue;
    }
    auto& acc = it->second;
    const double wa = acc.n_samples;
    const double wb = r.n_samples;
    for (std::size_t i = 0; i < acc.probs.size(); ++i) {
      acc.probs[i] = (wa * acc.probs[i] + wb * r.probs[i]) / (wa + wb);
    }
    acc.n_samples += r.n_samples;
  }
  if (merged.empty()) {
    throw DatasetError("no records for t_entity = " + std::to_string(t_entity));
  }

  std::vector<DistributionRecord> all;
  all.reserve(merged.size());
  for (auto& [key, rec] : merged) all.push_back(std::move(rec));
  Rng rng(seed);
  rng.shuffle(std::span<DistributionRecord>(all));

  const auto sizes = split_sizes(all.size());
  DatasetSplit split;
  split.split_seed = seed;
  auto first = std::make_move_iterator(all.begin());
  split.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes.train));
  split.val.assign(first + static_cast<std::ptrdiff_t>(sizes.train),
                   first + static_cast<std::ptrdiff_t>(sizes.train + sizes.val));
  split.test.assign(first + static_cast<std::ptrdiff_t>(sizes.train + sizes.val),
                    std::make_move_iterator(all.end()));
  return split;
}

// Mean record distribution per positional index; rows without records fall
// back to uniform.
inline DistributionTable oracle_table_from_records(const std::vector<DistributionRecord>& records,
                                                   int n) {
  DistributionTable table(static_cast<std::size_t>(n), std::vector<double>(n, 0.0));
  std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
  for (const auto& r : records) {
    if (r.n != n) throw DatasetError("record n does not match the oracle table size");
    auto& row = table[r.indices.i_p - 1];
    for (int i = 0; i < n; ++i) row[i] += r.probs[i];
    weight[r.indices.i_p - 1] += 1.0;
  }
  for (int k = 0; k < n; ++k) {
    for (auto& v : table[k]) v = weight[k] > 0 ? v / weight[k] : 1.0 / n;
  }
  return table;
}

struct SynthOptions {
  int t_entity = 1;
  // nullopt: noiseless records equal to the model output.
  std::optional<double> noise_concentration;
  std::uint64_t seed = 0;
  // Restrict to triples with pairwise-distinct indices; otherwise all n^3.
  bool distinct_only = false;
  std::string task = "synthetic";
};

// Dirichlet draw with concentration `scale * mean`.
inline std::vector<double> dirichlet_perturb(std::span<const double> mean, double scale,
                                             std::mt19937_64& engine) {
  std::vector<double> out(mean.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double shape = scale * mean[i];
    if (shape <= 0.0) {
      out[i] = 0.0;
      continue;
    }
    std::gamma_distribution<double> gamma(shape, 1.0);
    out[i] = gamma(engine);
    total += out[i];
  }
  if (total <= 0.0) return std::vector<double>(mean.begin(), mean.end());
  for (auto& v : out) v /= total;
  return out;
}

inline std::vector<DistributionRecord> synth_dataset(const MixtureParameters& truth,
                                                     const VariantSpec& variant,
                                                     const SynthOptions& opts) {
  truth.validate();
  variant.validate(truth.n);
  const int n = truth.n;
  std::vector<DistributionRecord> out;
  out.reserve(static_cast<std::size_t>(n) * n * n);
  std::mt19937_64 engine(opts.seed);
  for (int ip = 1; ip <= n; ++ip) {
    for (int il = 1; il <= n; ++il) {
      for (int ir = 1; ir <= n; ++ir) {
        if (opts.distinct_only && (ip == il || ip == ir || il == ir)) continue;
        DistributionRecord r;
        r.task = opts.task;
        r.model_name = "synthetic:" + variant.name;
        r.n = n;
        r.t_entity = opts.t_entity;
        r.indices = {ip, il, ir};
        r.probs = predict_distribution(truth, variant, r.indices);
        if (opts.noise_concentration) {
          r.probs = dirichlet_perturb(r.probs, *opts.noise_concentration, engine);
        }
        r.synthetic = true;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace bindlab
