#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "bindlab/errors.hpp"
#include "bindlab/random.hpp"
#include "bindlab/task.hpp"

namespace bindlab {

// Draws n distinct entities per role without replacement via a seeded shuffle
// of each role's vocabulary.
inline BindingMatrix sample_binding_matrix(const TaskTemplate& task, int n, std::uint64_t seed) {
  if (n < 1) throw ContractError("binding matrix needs at least one group");
  std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(n));
  for (const auto& role : task.roles) {
    if (static_cast<int>(role.vocabulary.size()) < n) {
      throw CapacityError("role '" + role.name + "' of task '" + task.id + "' has " +
                          std::to_string(role.vocabulary.size()) +
                          " entities, fewer than n = " + std::to_string(n));
    }
    auto pool = role.vocabulary;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(role.role_id)));
    rng.shuffle(std::span<std::string>(pool));
    for (int g = 0; g < n; ++g) rows[g].push_back(pool[g]);
  }
  BindingMatrix matrix(std::move(rows));
  if (!matrix.all_distinct()) {
    throw ContractError("task '" + task.id + "' has overlapping role vocabularies");
  }
  return matrix;
}

namespace detail {

// Appends `pattern` to `out`, substituting $k with row entries and recording
// one span per substituted slot.
inline void expand_pattern(const std::string& pattern, const std::vector<std::string>& row,
                           int group, bool in_question, std::string& out,
                           std::vector<Span>& spans) {
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char ch = pattern[i];
    if (ch == '$' && i + 1 < pattern.size() &&
        std::isdigit(static_cast<unsigned char>(pattern[i + 1]))) {
      const int column = pattern[i + 1] - '0';
      if (column < 1 || column > static_cast<int>(row.size())) {
        throw TemplateError("pattern slot $" + std::to_string(column) + " has no column");
      }
      const auto& entity = row[column - 1];
      spans.push_back(Span{group, column, out.size(), out.size() + entity.size(), in_question});
      out += entity;
      ++i;
    } else {
      out += ch;
    }
  }
}

}  // namespace detail

// Renders clauses in row order, optional filler sentences after each clause
// but the last, and the question for query.t_entity.
inline PromptInstance render_prompt(const TemplatePtr& layout, const BindingMatrix& matrix,
                                    const QuerySpec& query,
                                    std::vector<std::vector<std::string>> gap_fillers = {}) {
  const TaskTemplate& tpl = *layout;
  const int n = matrix.groups();
  if (matrix.columns() != tpl.m()) {
    throw TemplateError("matrix has " + std::to_string(matrix.columns()) + " columns but task '" +
                        tpl.id + "' has " + std::to_string(tpl.m()) + " roles");
  }
  if (query.q_group < 1 || query.q_group > n) {
    throw IndexError("q_group " + std::to_string(query.q_group) + " outside [1, " +
                     std::to_string(n) + "]");
  }
  if (query.t_entity < 1 || query.t_entity > tpl.m()) {
    throw IndexError("t_entity " + std::to_string(query.t_entity) + " outside [1, " +
                     std::to_string(tpl.m()) + "]");
  }
  auto question = tpl.questions.find(query.t_entity);
  if (question == tpl.questions.end()) {
    throw TemplateError("task '" + tpl.id + "' has no question for t_entity = " +
                        std::to_string(query.t_entity));
  }
  gap_fillers.resize(static_cast<std::size_t>(n > 1 ? n - 1 : 0));

  PromptInstance inst;
  inst.layout = layout;
  inst.matrix = matrix;
  inst.query = query;
  inst.answer = matrix.at(query.q_group, query.t_entity);

  std::string& text = inst.text;
  text = tpl.preamble;
  for (int g = 1; g <= n; ++g) {
    if (g > 1) {
      text += tpl.joiner;
      if (g == n) text += tpl.final_conjunction;
    }
    detail::expand_pattern(tpl.clause, matrix.row(g), g, false, text, inst.spans);
    if (g < n) {
      for (const auto& filler : gap_fillers[g - 1]) {
        text += tpl.joiner;
        text += filler;
      }
    }
  }
  text += ". ";
  detail::expand_pattern(question->second, matrix.row(query.q_group), query.q_group, true, text,
                         inst.spans);

  const bool first_char_in_entity =
      !inst.spans.empty() && std::any_of(inst.spans.begin(), inst.spans.end(),
                                         [](const Span& s) { return s.begin == 0; });
  if (!text.empty() && !first_char_in_entity) {
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  }
  inst.gap_fillers = std::move(gap_fillers);
  return inst;
}

// Reads the binding matrix back out of the rendered text using clause spans.
inline BindingMatrix extract_matrix(const PromptInstance& inst) {
  std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(inst.n()),
                                             std::vector<std::string>(inst.m()));
  std::vector<std::vector<int>> seen(rows.size(), std::vector<int>(inst.m(), 0));
  for (const auto& s : inst.spans) {
    if (s.in_question) continue;
    if (s.group < 1 || s.group > inst.n() || s.column < 1 || s.column > inst.m()) {
      throw IndexError("span refers to a cell outside the matrix");
    }
    rows[s.group - 1][s.column - 1] = std::string(inst.slice(s));
    ++seen[s.group - 1][s.column - 1];
  }
  for (const auto& r : seen) {
    for (int count : r) {
      if (count != 1) throw ParseError("clause spans do not cover every cell exactly once");
    }
  }
  return BindingMatrix(std::move(rows));
}

}  // namespace bindlab
