#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bindlab/counterfactual.hpp"
#include "bindlab/dataset.hpp"
#include "bindlab/errors.hpp"
#include "bindlab/mixture.hpp"
#include "bindlab/random.hpp"

namespace bindlab {

// One intervention outcome after classification.
struct LabeledOutcome {
  std::string id;
  std::string task;
  int n = 0;
  int t_entity = 1;
  int q_group = 1;
  MechanismIndices indices;
  std::optional<std::string> observed;
  PatchEffectLabel label;
};

inline LabeledOutcome label_outcome(const CounterfactualPair& pair, std::string_view observed,
                                    std::string id = {}) {
  LabeledOutcome out;
  out.id = std::move(id);
  out.task = pair.original.layout ? pair.original.layout->id : std::string{};
  out.n = pair.original.n();
  out.t_entity = pair.original.query.t_entity;
  out.q_group = pair.original.query.q_group;
  out.indices = pair.indices;
  out.observed = std::string(observed);
  out.label = classify_patch_effect(pair, observed);
  return out;
}

enum class Axis { PositionalIndex, LexicalIndex, ReflexiveIndex, QueryGroup, GroupCount };

inline std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::PositionalIndex: return "i_p";
    case Axis::LexicalIndex: return "i_l";
    case Axis::ReflexiveIndex: return "i_r";
    case Axis::QueryGroup: return "q_group";
    case Axis::GroupCount: return "n";
  }
  return "?";
}

inline Axis parse_axis(std::string_view s) {
  for (Axis a : {Axis::PositionalIndex, Axis::LexicalIndex, Axis::ReflexiveIndex,
                 Axis::QueryGroup, Axis::GroupCount}) {
    if (s == to_string(a)) return a;
  }
  throw ParseError("unknown axis '" + std::string(s) + "'");
}

inline int axis_value(const LabeledOutcome& r, Axis a) {
  switch (a) {
    case Axis::PositionalIndex: return r.indices.i_p;
    case Axis::LexicalIndex: return r.indices.i_l;
    case Axis::ReflexiveIndex: return r.indices.i_r;
    case Axis::QueryGroup: return r.q_group;
    case Axis::GroupCount: return r.n;
  }
  return 0;
}

inline constexpr std::size_t kEffectCount = std::size(kAllEffects);

struct EffectSummary {
  int key = 0;
  std::array<std::size_t, kEffectCount> counts{};
  std::size_t count = 0;

  double share(EffectKind k) const {
    return count == 0 ? 0.0
                      : static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                            static_cast<double>(count);
  }
};

struct EffectCurve {
  Axis axis = Axis::PositionalIndex;
  std::vector<EffectSummary> buckets;  // ascending key, non-empty only
  std::vector<int> empty_keys;         // keys in [1, n_max] with no records

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& b : buckets) t += b.count;
    return t;
  }
};

// Label shares per axis value. For index axes, values in [1, max n] without
// records are reported in empty_keys rather than as zero rows.
inline EffectCurve ucurve(std::span<const LabeledOutcome> records, Axis axis) {
  std::map<int, EffectSummary> buckets;
  int n_max = 0;
  for (const auto& r : records) {
    const int key = axis_value(r, axis);
    auto& b = buckets[key];
    b.key = key;
    ++b.counts[static_cast<std::size_t>(r.label.kind)];
    ++b.count;
    n_max = std::max(n_max, r.n);
  }
  EffectCurve curve;
  curve.axis = axis;
  for (auto& [key, b] : buckets) curve.buckets.push_back(b);
  if (axis != Axis::GroupCount) {
    for (int k = 1; k <= n_max; ++k) {
      if (!buckets.contains(k)) curve.empty_keys.push_back(k);
    }
  }
  return curve;
}

// Label shares per prompt length n.
inline EffectCurve n_sweep_summary(std::span<const LabeledOutcome> records) {
  return ucurve(records, Axis::GroupCount);
}

// Rows: patched positional index. Columns: observed group index. Only
// positional (column i_p) and mixed(k) (column k) outcomes enter.
struct ConfusionMatrix {
  int n = 0;
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::vector<double>> percent;
  std::size_t included = 0;
  std::map<EffectKind, std::size_t> excluded;

  double row_sum(int row) const {
    double s = 0.0;
    for (double v : percent.at(static_cast<std::size_t>(row - 1))) s += v;
    return s;
  }
  std::size_t row_count(int row) const {
    std::size_t s = 0;
    for (auto v : counts.at(static_cast<std::size_t>(row - 1))) s += v;
    return s;
  }
};

inline ConfusionMatrix confusion(std::span<const LabeledOutcome> records) {
  ConfusionMatrix cm;
  for (const auto& r : records) cm.n = std::max(cm.n, r.n);
  const auto n = static_cast<std::size_t>(cm.n);
  cm.counts.assign(n, std::vector<std::size_t>(n, 0));
  cm.percent.assign(n, std::vector<double>(n, 0.0));
  for (const auto& r : records) {
    int col = 0;
    if (r.label.kind == EffectKind::Positional) col = r.indices.i_p;
    else if (r.label.kind == EffectKind::Mixed) col = r.label.mixed_index;
    if (col < 1) {
      ++cm.excluded[r.label.kind];
      continue;
    }
    ++cm.counts[r.indices.i_p - 1][col - 1];
    ++cm.included;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t total = 0;
    for (auto v : cm.counts[i]) total += v;
    if (total == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      cm.percent[i][j] = 100.0 * static_cast<double>(cm.counts[i][j]) / static_cast<double>(total);
    }
  }
  return cm;
}

enum class IndexRole { P, L, R };

inline int index_of(const MechanismIndices& ix, IndexRole r) {
  switch (r) {
    case IndexRole::P: return ix.i_p;
    case IndexRole::L: return ix.i_l;
    case IndexRole::R: return ix.i_r;
  }
  return 0;
}

// Two of the three indices held fixed, the third varied across [1, n].
struct ProfileQuery {
  std::optional<int> i_p, i_l, i_r;

  IndexRole varied() const {
    const int set = int(i_p.has_value()) + int(i_l.has_value()) + int(i_r.has_value());
    if (set != 2) throw ContractError("profile needs exactly two fixed indices");
    if (!i_p) return IndexRole::P;
    if (!i_l) return IndexRole::L;
    return IndexRole::R;
  }
};

struct ProfileRow {
  int value = 0;
  std::size_t count = 0;
  std::vector<double> mean;
  int peak = 0;  // argmax, 1-based
  // Mean probability at each mechanism's index for this row.
  double at_p = 0.0, at_l = 0.0, at_r = 0.0;
};

struct Profile {
  IndexRole varied = IndexRole::L;
  int n = 0;
  std::vector<ProfileRow> rows;
  std::vector<int> missing;
  bool partial() const { return !missing.empty(); }
};

inline Profile profile(std::span<const DistributionRecord> records, const ProfileQuery& query) {
  Profile out;
  out.varied = query.varied();
  std::map<int, ProfileRow> acc;
  for (const auto& r : records) {
    if (query.i_p && r.indices.i_p != *query.i_p) continue;
    if (query.i_l && r.indices.i_l != *query.i_l) continue;
    if (query.i_r && r.indices.i_r != *query.i_r) continue;
    if (out.n == 0) out.n = r.n;
    if (r.n != out.n) throw DatasetError("profile records disagree on n");
    const int v = index_of(r.indices, out.varied);
    auto& row = acc[v];
    if (row.mean.empty()) row.mean.assign(r.probs.size(), 0.0);
    row.value = v;
    for (std::size_t i = 0; i < r.probs.size(); ++i) row.mean[i] += r.probs[i];
    ++row.count;
  }
  for (auto& [v, row] : acc) {
    for (auto& x : row.mean) x /= static_cast<double>(row.count);
    row.peak = 1 + static_cast<int>(std::max_element(row.mean.begin(), row.mean.end()) -
                                    row.mean.begin());
    const MechanismIndices ix{query.i_p.value_or(v), query.i_l.value_or(v), query.i_r.value_or(v)};
    row.at_p = row.mean[ix.i_p - 1];
    row.at_l = row.mean[ix.i_l - 1];
    row.at_r = row.mean[ix.i_r - 1];
    out.rows.push_back(std::move(row));
  }
  for (int v = 1; v <= out.n; ++v) {
    if (!acc.contains(v)) out.missing.push_back(v);
  }
  return out;
}

// Stand-in responder for runs without a language model: draws the observed
// group from the mixture's predicted distribution at the pair's indices.
inline int simulate_response(const MixtureParameters& params, const VariantSpec& variant,
                             const MechanismIndices& ix, Rng& rng) {
  const auto probs = predict_distribution(params, variant, ix);
  const double u = rng.uniform01();
  double c = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    c += probs[i];
    if (u < c) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(probs.size());
}

}  // namespace bindlab
