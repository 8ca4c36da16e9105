#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bindlab/counterfactual.hpp"
#include "bindlab/errors.hpp"
#include "bindlab/task.hpp"

namespace bindlab {

// The three single-variable causal models of entity retrieval.
//   positional: P := q_group, output G[P][t_entity]
//   lexical:    L := query entities, output the target of the row holding L
//   reflexive:  R := target entity, output R if it occurs in context

enum class Variable { P, L, R };

struct MechanismState {
  Variable variable = Variable::P;
  std::variant<int, std::vector<std::string>, std::string> value;
  bool intervened = false;
};

struct MechanismOutput {
  std::optional<std::string> entity;  // nullopt: pointer cannot be dereferenced
  bool ambiguous = false;             // L matched more than one row

  bool dereferenced() const { return entity.has_value(); }
  friend bool operator==(const MechanismOutput&, const MechanismOutput&) = default;
};

inline MechanismState positional_state(const PromptInstance& inst,
                                       std::optional<int> intervention = std::nullopt) {
  return {Variable::P, intervention.value_or(inst.query.q_group), intervention.has_value()};
}

inline MechanismState lexical_state(const PromptInstance& inst,
                                    std::optional<std::vector<std::string>> intervention = {}) {
  const bool intervened = intervention.has_value();
  return {Variable::L, intervened ? std::move(*intervention) : inst.query_entities(), intervened};
}

inline MechanismState reflexive_state(const PromptInstance& inst,
                                      std::optional<std::string> intervention = {}) {
  const bool intervened = intervention.has_value();
  return {Variable::R, intervened ? std::move(*intervention) : inst.answer, intervened};
}

inline MechanismOutput run_positional(const PromptInstance& inst,
                                      std::optional<int> intervention = std::nullopt) {
  const int p = intervention.value_or(inst.query.q_group);
  if (p < 1 || p > inst.n()) {
    throw IndexError("positional variable P = " + std::to_string(p) + " outside [1, " +
                     std::to_string(inst.n()) + "]");
  }
  return {inst.matrix.at(p, inst.query.t_entity), false};
}

// L is matched only against the query columns, one entity per query column.
// Among several matching rows the earliest wins and the result is flagged.
inline MechanismOutput run_lexical(const PromptInstance& inst,
                                   std::optional<std::vector<std::string>> intervention = {}) {
  const std::vector<std::string> key = intervention ? *intervention : inst.query_entities();
  const auto& cols = inst.query.query_columns;
  if (key.size() != cols.size()) {
    throw ContractError("lexical variable needs one entity per query column (" +
                        std::to_string(cols.size()) + "), got " + std::to_string(key.size()));
  }
  MechanismOutput out;
  for (int g = 1; g <= inst.n(); ++g) {
    bool match = true;
    for (std::size_t k = 0; k < cols.size() && match; ++k) {
      match = inst.matrix.at(g, cols[k]) == key[k];
    }
    if (!match) continue;
    if (out.entity) {
      out.ambiguous = true;
      break;
    }
    out.entity = inst.matrix.at(g, inst.query.t_entity);
  }
  return out;
}

inline MechanismOutput run_lexical(const PromptInstance& inst, const std::string& single) {
  return run_lexical(inst, std::vector<std::string>{single});
}

inline MechanismOutput run_reflexive(const PromptInstance& inst,
                                     std::optional<std::string> intervention = {}) {
  const std::string r = intervention ? *intervention : inst.answer;
  if (inst.matrix.contains(r)) return {r, false};
  return {std::nullopt, false};
}

struct InterventionTable {
  std::string none;
  MechanismOutput positional;
  MechanismOutput lexical;
  MechanismOutput reflexive;
};

// Runs each causal model on the original with its variable taken from the
// counterfactual run, and checks the outcome against the pair's predictions.
inline InterventionTable intervention_table(const CounterfactualPair& pair) {
  if (pair.kind == PairKind::PosSwap || pair.kind == PairKind::LexSwap ||
      pair.kind == PairKind::RefSwap) {
    throw ContractError("intervention_table applies to last-token pairs, not entity swaps");
  }
  const auto& orig = pair.original;
  const auto& cf = pair.counterfactual;
  const auto p = std::get<int>(positional_state(cf).value);
  const auto l = std::get<std::vector<std::string>>(lexical_state(cf).value);
  const auto r = std::get<std::string>(reflexive_state(cf).value);

  InterventionTable table{orig.answer, run_positional(orig, p), run_lexical(orig, l),
                          run_reflexive(orig, r)};

  auto check = [](const char* name, const MechanismOutput& got, const Prediction& want) {
    if (got.entity != want) {
      throw ConsistencyError(std::string(name) + " mechanism yields '" +
                             got.entity.value_or("<non-dereferenceable>") +
                             "' but the pair predicts '" + want.value_or("<non-dereferenceable>") +
                             "'");
    }
  };
  if (table.none != pair.predicted.none) {
    throw ConsistencyError("unintervened output differs from the predicted original answer");
  }
  check("positional", table.positional, pair.predicted.positional);
  check("lexical", table.lexical, pair.predicted.lexical);
  check("reflexive", table.reflexive, pair.predicted.reflexive);
  return table;
}

}  // namespace bindlab
