#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bindlab/errors.hpp"
#include "bindlab/random.hpp"
#include "bindlab/render.hpp"
#include "bindlab/task.hpp"

namespace bindlab {

enum class PairKind {
  TargetRebind,
  PosSwap,
  LexSwap,
  RefSwap,
  LexicalDangling,
  ReflexiveDangling,
  Agreement,
  Identity,
};

inline std::string_view to_string(PairKind k) {
  switch (k) {
    case PairKind::TargetRebind: return "target-rebind";
    case PairKind::PosSwap: return "pos-swap";
    case PairKind::LexSwap: return "lex-swap";
    case PairKind::RefSwap: return "ref-swap";
    case PairKind::LexicalDangling: return "dangling-lex";
    case PairKind::ReflexiveDangling: return "dangling-ref";
    case PairKind::Agreement: return "agreement";
    case PairKind::Identity: return "identity";
  }
  return "?";
}

inline PairKind parse_pair_kind(std::string_view s) {
  for (auto k : {PairKind::TargetRebind, PairKind::PosSwap, PairKind::LexSwap, PairKind::RefSwap,
                 PairKind::LexicalDangling, PairKind::ReflexiveDangling, PairKind::Agreement,
                 PairKind::Identity}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown pair kind '" + std::string(s) + "'");
}

enum class AgreementKind { PosRef, PosLex };

struct MechanismIndices {
  int i_p = 1;
  int i_l = 1;
  int i_r = 1;
  friend bool operator==(const MechanismIndices&, const MechanismIndices&) = default;
};

// nullopt marks a pointer whose referent is absent from the original prompt
// (or a mechanism the pair does not probe).
using Prediction = std::optional<std::string>;

struct PredictedOutputs {
  std::string none;
  Prediction positional;
  Prediction lexical;
  Prediction reflexive;
  friend bool operator==(const PredictedOutputs&, const PredictedOutputs&) = default;
};

// Patch the counterfactual's `source` span into the original's `dest` span.
struct SpanAlignment {
  Span source;
  Span dest;
  std::string entity;
};

struct CounterfactualPair {
  PairKind kind = PairKind::TargetRebind;
  PromptInstance original;
  PromptInstance counterfactual;
  MechanismIndices indices;
  PredictedOutputs predicted;
  std::vector<SpanAlignment> alignment;
  std::optional<AgreementKind> agreement;
};

enum class FillPolicy {
  Derangement,  // leftover entities avoid their original rows
  Ordered,      // leftover entities keep their relative row order
};

inline bool separating(const MechanismIndices& ix, int q_group) {
  return ix.i_p != ix.i_l && ix.i_p != ix.i_r && ix.i_l != ix.i_r && ix.i_p != q_group &&
         ix.i_l != q_group && ix.i_r != q_group;
}

namespace detail {

inline void check_index(int value, int n, const char* name) {
  if (value < 1 || value > n) {
    throw ConstructionError(std::string(name) + " = " + std::to_string(value) + " outside [1, " +
                            std::to_string(n) + "]");
  }
}

// Row i_p receives the query-column entities of lex_row and the target entity
// of ref_row; every other cell is refilled per column from the leftovers.
inline BindingMatrix rebind(const BindingMatrix& g, int t_entity, int i_p, int lex_row,
                            int ref_row, Rng& rng, FillPolicy policy) {
  const int n = g.groups();
  const int m = g.columns();
  std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(n),
                                             std::vector<std::string>(m));
  std::vector<int> free_rows;
  for (int r = 1; r <= n; ++r) {
    if (r != i_p) free_rows.push_back(r);
  }
  for (int c = 1; c <= m; ++c) {
    const int source_row = (c == t_entity) ? ref_row : lex_row;
    rows[i_p - 1][c - 1] = g.at(source_row, c);

    std::vector<int> origin;  // original row of each leftover entity
    for (int r = 1; r <= n; ++r) {
      if (r != source_row) origin.push_back(r);
    }
    std::vector<std::size_t> order(origin.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;

    if (policy == FillPolicy::Derangement && order.size() >= 2) {
      auto has_fixed_point = [&] {
        for (std::size_t k = 0; k < order.size(); ++k) {
          if (origin[order[k]] == free_rows[k]) return true;
        }
        return false;
      };
      do {
        rng.shuffle(std::span<std::size_t>(order));
      } while (has_fixed_point());
    }
    for (std::size_t k = 0; k < free_rows.size(); ++k) {
      rows[free_rows[k] - 1][c - 1] = g.at(origin[order[k]], c);
    }
  }
  return BindingMatrix(std::move(rows));
}

inline std::vector<SpanAlignment> cell_alignment(const PromptInstance& cf,
                                                 const PromptInstance& orig) {
  std::vector<SpanAlignment> out;
  for (int g = 1; g <= orig.n(); ++g) {
    for (int c = 1; c <= orig.m(); ++c) {
      const Span* s = cf.clause_span(g, c);
      const Span* d = orig.clause_span(g, c);
      if (s && d) out.push_back({*s, *d, std::string(cf.slice(*s))});
    }
  }
  return out;
}

inline std::string fresh_entity(const TaskTemplate& task, int column, const BindingMatrix& avoid,
                                Rng& rng) {
  const auto& role = task.roles.at(static_cast<std::size_t>(column - 1));
  std::vector<std::string> unused;
  for (const auto& e : role.vocabulary) {
    if (!avoid.contains(e)) unused.push_back(e);
  }
  if (unused.empty()) {
    throw CapacityError("role '" + role.name + "' of task '" + task.id +
                        "' has no entity unused by the prompt");
  }
  return unused[rng.below(unused.size())];
}

}  // namespace detail

// Builds the mechanism-separating pair: after an interchange intervention the
// positional, lexical and reflexive models point at rows i_p, i_l and i_r of
// the original, all distinct from the original query group.
inline CounterfactualPair make_target_rebind(const TemplatePtr& layout, const BindingMatrix& g,
                                             const QuerySpec& query, const MechanismIndices& ix,
                                             std::uint64_t seed,
                                             FillPolicy policy = FillPolicy::Derangement) {
  const int n = g.groups();
  detail::check_index(query.q_group, n, "q_group");
  detail::check_index(ix.i_p, n, "i_p");
  detail::check_index(ix.i_l, n, "i_l");
  detail::check_index(ix.i_r, n, "i_r");
  if (!separating(ix, query.q_group)) {
    throw ConstructionError("i_p, i_l, i_r and q_group must be pairwise distinct" +
                            std::string(n < 4 ? " (impossible with n < 4)" : ""));
  }
  if (!g.all_distinct()) throw ConstructionError("binding matrix entries must be distinct");

  Rng rng(seed);
  const int t = query.t_entity;
  CounterfactualPair pair;
  pair.kind = PairKind::TargetRebind;
  pair.indices = ix;
  pair.original = render_prompt(layout, g, query);
  const BindingMatrix rebound = detail::rebind(g, t, ix.i_p, ix.i_l, ix.i_r, rng, policy);
  pair.counterfactual =
      render_prompt(layout, rebound, QuerySpec::make(ix.i_p, t, g.columns()));
  pair.predicted = {g.at(query.q_group, t), g.at(ix.i_p, t), g.at(ix.i_l, t), g.at(ix.i_r, t)};
  pair.alignment = detail::cell_alignment(pair.counterfactual, pair.original);
  return pair;
}

enum class DanglingPointer { Lexical, Reflexive };

// Target-rebind pair whose lexical (query entities) or reflexive (target
// entity) pointer refers to an entity that never appears in the original.
inline CounterfactualPair make_dangling(const TemplatePtr& layout, const BindingMatrix& g,
                                        const QuerySpec& query, const MechanismIndices& ix,
                                        DanglingPointer which, std::uint64_t seed,
                                        FillPolicy policy = FillPolicy::Derangement) {
  auto pair = make_target_rebind(layout, g, query, ix, seed, policy);
  Rng rng(derive_seed(seed, 0xda));
  BindingMatrix cf = pair.counterfactual.matrix;
  if (which == DanglingPointer::Lexical) {
    for (int c : query.query_columns) {
      cf.at(ix.i_p, c) = detail::fresh_entity(*layout, c, g, rng);
    }
    pair.kind = PairKind::LexicalDangling;
    pair.predicted.lexical.reset();
  } else {
    cf.at(ix.i_p, query.t_entity) = detail::fresh_entity(*layout, query.t_entity, g, rng);
    pair.kind = PairKind::ReflexiveDangling;
    pair.predicted.reflexive.reset();
  }
  pair.counterfactual = render_prompt(layout, cf, pair.counterfactual.query);
  pair.alignment = detail::cell_alignment(pair.counterfactual, pair.original);
  return pair;
}

// Pair where the positional pointer coincides with the reflexive one
// (t_entity = 1) or with the lexical one (t_entity = m).
inline CounterfactualPair make_agreement(const TemplatePtr& layout, const BindingMatrix& g,
                                         const QuerySpec& query, AgreementKind agree,
                                         std::uint64_t seed,
                                         FillPolicy policy = FillPolicy::Derangement) {
  const int n = g.groups();
  const int m = g.columns();
  if (agree == AgreementKind::PosRef && query.t_entity != 1) {
    throw ContractError("pos-ref agreement requires t_entity = 1");
  }
  if (agree == AgreementKind::PosLex && query.t_entity != m) {
    throw ContractError("pos-lex agreement requires t_entity = m");
  }
  if (n < 3) throw ConstructionError("agreement pairs need n >= 3");
  detail::check_index(query.q_group, n, "q_group");
  if (!g.all_distinct()) throw ConstructionError("binding matrix entries must be distinct");

  Rng rng(seed);
  std::vector<int> rows;
  for (int r = 1; r <= n; ++r) {
    if (r != query.q_group) rows.push_back(r);
  }
  rng.shuffle(std::span<int>(rows));
  const int shared = rows[0];
  const int other = rows[1];
  MechanismIndices ix = agree == AgreementKind::PosRef ? MechanismIndices{shared, other, shared}
                                                       : MechanismIndices{shared, shared, other};

  CounterfactualPair pair;
  pair.kind = PairKind::Agreement;
  pair.agreement = agree;
  pair.indices = ix;
  pair.original = render_prompt(layout, g, query);
  const BindingMatrix rebound =
      detail::rebind(g, query.t_entity, ix.i_p, ix.i_l, ix.i_r, rng, policy);
  pair.counterfactual = render_prompt(layout, rebound, QuerySpec::make(ix.i_p, query.t_entity, m));
  const int t = query.t_entity;
  pair.predicted = {g.at(query.q_group, t), g.at(ix.i_p, t), g.at(ix.i_l, t), g.at(ix.i_r, t)};
  pair.alignment = detail::cell_alignment(pair.counterfactual, pair.original);
  return pair;
}

// Two-group entity-token swaps. The patched tokens are the last-column
// entities ("box labels"), aligned by identity between the two prompts.
//   PosSwap: whole groups exchange places; question about the last column.
//   LexSwap: query-column entities exchange groups; question unchanged.
//   RefSwap: first-column entities exchange groups; question asks for the
//            first column given the rest.
inline CounterfactualPair make_entity_swap(PairKind kind, const TemplatePtr& layout,
                                           const BindingMatrix& g, int q_group) {
  if (kind != PairKind::PosSwap && kind != PairKind::LexSwap && kind != PairKind::RefSwap) {
    throw ContractError("make_entity_swap expects pos-swap, lex-swap or ref-swap");
  }
  if (g.groups() != 2) throw ContractError("entity swaps are defined for n = 2");
  if (q_group != 1 && q_group != 2) throw IndexError("q_group must be 1 or 2");
  const int m = g.columns();
  if (m < 2) throw ContractError("entity swaps need at least two columns");
  const int t = (kind == PairKind::RefSwap) ? 1 : m;
  if (!layout->has_question(t)) {
    throw ContractError("task '" + layout->id + "' has no question form for t_entity = " +
                        std::to_string(t));
  }
  const int other = 3 - q_group;

  BindingMatrix cf = g;
  int cf_q = q_group;
  if (kind == PairKind::PosSwap) {
    cf.swap_rows(1, 2);
    cf_q = other;
  } else {
    const int last = (kind == PairKind::LexSwap) ? m - 1 : 1;
    for (int c = 1; c <= last; ++c) std::swap(cf.at(1, c), cf.at(2, c));
    cf_q = (kind == PairKind::LexSwap) ? other : q_group;
  }

  CounterfactualPair pair;
  pair.kind = kind;
  pair.original = render_prompt(layout, g, QuerySpec::make(q_group, t, m));
  pair.counterfactual = render_prompt(layout, cf, QuerySpec::make(cf_q, t, m));
  pair.predicted.none = g.at(q_group, t);
  const std::string flipped = g.at(other, t);
  pair.indices = {q_group, q_group, q_group};
  switch (kind) {
    case PairKind::PosSwap:
      pair.predicted.positional = flipped;
      pair.indices.i_p = other;
      break;
    case PairKind::LexSwap:
      pair.predicted.lexical = flipped;
      pair.indices.i_l = other;
      break;
    default:
      pair.predicted.reflexive = flipped;
      pair.indices.i_r = other;
      break;
  }
  for (int r = 1; r <= 2; ++r) {
    const Span* dest = pair.original.clause_span(r, m);
    const auto cell = cf.find(g.at(r, m));
    const Span* source = pair.counterfactual.clause_span(cell->group, cell->column);
    pair.alignment.push_back({*source, *dest, g.at(r, m)});
  }
  return pair;
}

inline CounterfactualPair make_entity_swap(PairKind kind, const TemplatePtr& layout,
                                           const BindingMatrix& g, std::uint64_t seed) {
  Rng rng(seed);
  return make_entity_swap(kind, layout, g, static_cast<int>(1 + rng.below(2)));
}

// Counterfactual equal to the original; every mechanism predicts the answer.
inline CounterfactualPair make_identity_pair(const PromptInstance& original) {
  CounterfactualPair pair;
  pair.kind = PairKind::Identity;
  pair.original = original;
  pair.counterfactual = original;
  const int q = original.query.q_group;
  pair.indices = {q, q, q};
  pair.predicted = {original.answer, original.answer, original.answer, original.answer};
  pair.alignment = detail::cell_alignment(original, original);
  return pair;
}

enum class EffectKind { Original, Positional, Lexical, Reflexive, Mixed, OutOfSet };

inline std::string_view to_string(EffectKind k) {
  switch (k) {
    case EffectKind::Original: return "original";
    case EffectKind::Positional: return "positional";
    case EffectKind::Lexical: return "lexical";
    case EffectKind::Reflexive: return "reflexive";
    case EffectKind::Mixed: return "mixed";
    case EffectKind::OutOfSet: return "out-of-set";
  }
  return "?";
}

inline EffectKind parse_effect_kind(std::string_view s) {
  for (auto k : {EffectKind::Original, EffectKind::Positional, EffectKind::Lexical,
                 EffectKind::Reflexive, EffectKind::Mixed, EffectKind::OutOfSet}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown patch effect label '" + std::string(s) + "'");
}

inline constexpr EffectKind kAllEffects[] = {EffectKind::Original, EffectKind::Positional,
                                             EffectKind::Lexical,  EffectKind::Reflexive,
                                             EffectKind::Mixed,    EffectKind::OutOfSet};

struct PatchEffectLabel {
  EffectKind kind = EffectKind::OutOfSet;
  int mixed_index = 0;  // group k for Mixed, else 0
  friend bool operator==(const PatchEffectLabel&, const PatchEffectLabel&) = default;
};

// Checks the predictions in order none, positional, lexical, reflexive; when
// two mechanisms agree on an entity the earlier one names the label.
inline PatchEffectLabel classify_patch_effect(const CounterfactualPair& pair,
                                              std::string_view observed) {
  const auto& p = pair.predicted;
  if (observed == p.none) return {EffectKind::Original, 0};
  if (p.positional && observed == *p.positional) return {EffectKind::Positional, 0};
  if (p.lexical && observed == *p.lexical) return {EffectKind::Lexical, 0};
  if (p.reflexive && observed == *p.reflexive) return {EffectKind::Reflexive, 0};
  const auto& g = pair.original.matrix;
  const int t = pair.original.query.t_entity;
  for (int k = 1; k <= g.groups(); ++k) {
    if (g.at(k, t) == observed) return {EffectKind::Mixed, k};
  }
  return {EffectKind::OutOfSet, 0};
}

inline PatchEffectLabel classify_patch_effect(const CounterfactualPair& pair, int group_index) {
  const auto& g = pair.original.matrix;
  if (group_index < 1 || group_index > g.groups()) return {EffectKind::OutOfSet, 0};
  return classify_patch_effect(pair, g.at(group_index, pair.original.query.t_entity));
}

// Uniform separating indices. q_group is drawn from the rows left over, or
// pinned to n.
struct SeparatingDraw {
  int q_group;
  MechanismIndices indices;
};

inline SeparatingDraw sample_separating(int n, Rng& rng, bool pin_query_last = false) {
  if (n < 4) throw ConstructionError("separating pairs need n >= 4");
  std::vector<int> rows;
  const int pool = pin_query_last ? n - 1 : n;
  for (int r = 1; r <= pool; ++r) rows.push_back(r);
  // Partial Fisher-Yates for the first four slots.
  for (int k = 0; k < 4 && k < pool; ++k) {
    const auto j = static_cast<std::size_t>(k) + rng.below(rows.size() - k);
    std::swap(rows[k], rows[j]);
  }
  const MechanismIndices ix{rows[0], rows[1], rows[2]};
  const int q = pin_query_last ? n : rows[3];
  return {q, ix};
}

struct PairRequest {
  PairKind kind = PairKind::TargetRebind;
  TemplatePtr task;
  int n = 20;
  int t_entity = 1;
  int count = 1;
  std::uint64_t seed = 0;
  bool pin_query_last = false;
  FillPolicy fill = FillPolicy::Derangement;
};

inline CounterfactualPair generate_pair(const PairRequest& req, std::size_t item) {
  const std::uint64_t s = derive_seed(req.seed, item);
  Rng rng(s);
  const BindingMatrix g = sample_binding_matrix(*req.task, req.n, derive_seed(s, 1));
  const int m = req.task->m();
  switch (req.kind) {
    case PairKind::PosSwap:
    case PairKind::LexSwap:
    case PairKind::RefSwap:
      return make_entity_swap(req.kind, req.task, g, derive_seed(s, 2));
    case PairKind::Agreement: {
      AgreementKind agree;
      if (req.t_entity == 1) {
        agree = AgreementKind::PosRef;
      } else if (req.t_entity == m) {
        agree = AgreementKind::PosLex;
      } else {
        throw ContractError("agreement pairs need t_entity = 1 (pos-ref) or t_entity = m (pos-lex)");
      }
      int q = req.n;
      if (!req.pin_query_last) q = rng.between(1, req.n);
      return make_agreement(req.task, g, QuerySpec::make(q, req.t_entity, m), agree,
                            derive_seed(s, 2), req.fill);
    }
    case PairKind::Identity: {
      const int q = req.pin_query_last ? req.n : rng.between(1, req.n);
      return make_identity_pair(render_prompt(req.task, g, QuerySpec::make(q, req.t_entity, m)));
    }
    default: break;
  }
  const auto draw = sample_separating(req.n, rng, req.pin_query_last);
  const auto query = QuerySpec::make(draw.q_group, req.t_entity, m);
  if (req.kind == PairKind::LexicalDangling || req.kind == PairKind::ReflexiveDangling) {
    return make_dangling(req.task, g, query, draw.indices,
                         req.kind == PairKind::LexicalDangling ? DanglingPointer::Lexical
                                                               : DanglingPointer::Reflexive,
                         derive_seed(s, 2), req.fill);
  }
  return make_target_rebind(req.task, g, query, draw.indices, derive_seed(s, 2), req.fill);
}

inline std::vector<CounterfactualPair> generate_pairs(const PairRequest& req) {
  std::vector<CounterfactualPair> out;
  out.reserve(static_cast<std::size_t>(req.count));
  for (int i = 0; i < req.count; ++i) out.push_back(generate_pair(req, static_cast<std::size_t>(i)));
  return out;
}

}  // namespace bindlab
