#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bindlab/errors.hpp"

namespace bindlab {

// Group and column indices are 1-based throughout the public API.

struct EntityRole {
  int role_id = 1;
  std::string name;
  std::vector<std::string> vocabulary;

  bool contains(std::string_view entity) const {
    return std::find(vocabulary.begin(), vocabulary.end(), entity) != vocabulary.end();
  }
};

struct Cell {
  int group = 0;
  int column = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

class BindingMatrix {
 public:
  BindingMatrix() = default;
  explicit BindingMatrix(std::vector<std::vector<std::string>> rows) : rows_(std::move(rows)) {
    for (const auto& row : rows_) {
      if (row.size() != rows_.front().size()) {
        throw ContractError("binding matrix rows must have equal length");
      }
    }
  }

  int groups() const { return static_cast<int>(rows_.size()); }
  int columns() const { return rows_.empty() ? 0 : static_cast<int>(rows_.front().size()); }

  const std::string& at(int group, int column) const {
    check(group, column);
    return rows_[group - 1][column - 1];
  }
  std::string& at(int group, int column) {
    check(group, column);
    return rows_[group - 1][column - 1];
  }

  const std::vector<std::string>& row(int group) const {
    check(group, 1);
    return rows_[group - 1];
  }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  // First cell holding `entity` in row-major order.
  std::optional<Cell> find(std::string_view entity) const {
    for (int g = 1; g <= groups(); ++g) {
      for (int c = 1; c <= columns(); ++c) {
        if (rows_[g - 1][c - 1] == entity) return Cell{g, c};
      }
    }
    return std::nullopt;
  }

  bool contains(std::string_view entity) const { return find(entity).has_value(); }

  bool all_distinct() const {
    std::vector<std::string> flat;
    for (const auto& row : rows_) flat.insert(flat.end(), row.begin(), row.end());
    std::sort(flat.begin(), flat.end());
    return std::adjacent_find(flat.begin(), flat.end()) == flat.end();
  }

  void swap_rows(int a, int b) {
    check(a, 1);
    check(b, 1);
    std::swap(rows_[a - 1], rows_[b - 1]);
  }

  friend bool operator==(const BindingMatrix&, const BindingMatrix&) = default;

 private:
  void check(int group, int column) const {
    if (group < 1 || group > groups() || column < 1 || column > columns()) {
      throw IndexError("binding matrix index (" + std::to_string(group) + ", " +
                       std::to_string(column) + ") out of range");
    }
  }

  std::vector<std::vector<std::string>> rows_;
};

struct QuerySpec {
  int q_group = 1;
  int t_entity = 1;
  // Every column other than t_entity, ascending.
  std::vector<int> query_columns;

  static QuerySpec make(int q_group, int t_entity, int m) {
    if (t_entity < 1 || t_entity > m) {
      throw IndexError("t_entity " + std::to_string(t_entity) + " outside [1, " +
                       std::to_string(m) + "]");
    }
    QuerySpec q{q_group, t_entity, {}};
    for (int c = 1; c <= m; ++c) {
      if (c != t_entity) q.query_columns.push_back(c);
    }
    return q;
  }

  friend bool operator==(const QuerySpec&, const QuerySpec&) = default;
};

// Clause and question patterns use $1..$m as entity slots, one per column.
struct TaskTemplate {
  std::string id;
  std::string preamble;
  std::string clause;
  std::map<int, std::string> questions;  // keyed by t_entity
  std::vector<EntityRole> roles;
  std::string joiner = ", ";
  std::string final_conjunction = "and ";

  int m() const { return static_cast<int>(roles.size()); }
  bool has_question(int t_entity) const { return questions.count(t_entity) != 0; }
};

using TemplatePtr = std::shared_ptr<const TaskTemplate>;

struct Span {
  int group = 0;
  int column = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool in_question = false;

  std::size_t length() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct PromptInstance {
  TemplatePtr layout;
  std::string text;
  BindingMatrix matrix;
  QuerySpec query;
  std::string answer;
  std::vector<Span> spans;
  // Filler sentences inserted after clause g (index g-1), one list per gap.
  std::vector<std::vector<std::string>> gap_fillers;

  int n() const { return matrix.groups(); }
  int m() const { return matrix.columns(); }

  std::vector<std::string> query_entities() const {
    std::vector<std::string> out;
    for (int c : query.query_columns) out.push_back(matrix.at(query.q_group, c));
    return out;
  }

  std::string_view slice(const Span& s) const {
    return std::string_view(text).substr(s.begin, s.end - s.begin);
  }

  const Span* clause_span(int group, int column) const {
    for (const auto& s : spans) {
      if (!s.in_question && s.group == group && s.column == column) return &s;
    }
    return nullptr;
  }
};

}  // namespace bindlab
