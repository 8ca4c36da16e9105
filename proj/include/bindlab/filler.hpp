#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bindlab/catalog.hpp"
#include "bindlab/errors.hpp"
#include "bindlab/random.hpp"
#include "bindlab/render.hpp"
#include "bindlab/task.hpp"

namespace bindlab {

inline constexpr int kMaxFillers = 1000;
inline constexpr int kMaxTokensPerGap = 500;

// Estimated token count of a piece of text.
using TokenEstimator = std::function<double(std::string_view)>;

inline std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

inline TokenEstimator word_count_estimator(double tokens_per_word = 1.3) {
  return [tokens_per_word](std::string_view text) {
    return static_cast<double>(count_words(text)) * tokens_per_word;
  };
}

// Splits on anything that is not alphanumeric or an apostrophe.
inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '\'') {
      cur += ch;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Every entity string of every shipped task, including the worked-example one.
inline const std::set<std::string>& all_entity_strings() {
  static const std::set<std::string> words = [] {
    std::set<std::string> s;
    auto add = [&s](const TaskTemplate& t) {
      for (const auto& r : t.roles) s.insert(r.vocabulary.begin(), r.vocabulary.end());
    };
    for (const auto& t : all_tasks()) add(*t);
    add(*love_template());
    return s;
  }();
  return words;
}

namespace detail {

inline std::vector<std::string> build_filler_bank() {
  static const char* const kSubjects[] = {
      "this",          "that",           "it",              "this idea",
      "that idea",     "this logic",     "the logic",       "this statement",
      "that statement", "this reasoning", "the reasoning",  "this claim",
      "that claim",    "this remark",    "the remark",      "this detail",
      "that detail",   "this part",      "that part",       "everything here",
      "all of this",   "this sentence",  "that sentence",   "this observation",
      "the observation", "this note",    "that note",       "this line",
      "the argument",  "this argument",  "this premise",    "the premise",
      "this thought",  "that thought",   "this description", "the description",
      "this summary",  "the summary",    "this point",      "that point"};
  static const char* const kPredicates[] = {
      "is a known fact",        "is easy to follow",          "is widely accepted",
      "seems clear enough",     "holds true in general",      "is worth keeping in mind",
      "makes sense",            "is simple to understand",    "is quite obvious",
      "follows naturally",      "is stated plainly",          "needs no further explanation",
      "is generally agreed upon", "is not surprising",        "can be taken for granted",
      "is fairly straightforward", "stays the same",          "is consistent with the rest",
      "was mentioned before",   "is rather ordinary",         "is true as usual",
      "should be noted",        "comes as no surprise",       "is easy to remember",
      "adds nothing new",       "is repeated often"};

  std::vector<std::string> bank{"this is a known fact", "this logic is easy to follow"};
  std::set<std::string> seen(bank.begin(), bank.end());
  const auto& entities = all_entity_strings();
  for (const char* subject : kSubjects) {
    for (const char* predicate : kPredicates) {
      std::string sentence = std::string(subject) + " " + predicate;
      if (seen.count(sentence)) continue;
      const auto words = split_words(sentence);
      const bool clean = std::none_of(words.begin(), words.end(),
                                      [&](const std::string& w) { return entities.count(w); });
      if (!clean) continue;
      seen.insert(sentence);
      bank.push_back(std::move(sentence));
    }
  }
  return bank;
}

}  // namespace detail

inline const std::vector<std::string>& filler_bank() {
  static const std::vector<std::string> bank = detail::build_filler_bank();
  return bank;
}

// Seed 0 yields the bank in canonical order; any other seed a seeded
// permutation of it.
inline std::vector<std::string> make_fillers(int count, std::uint64_t seed) {
  if (count < 0 || count > kMaxFillers) {
    throw ContractError("filler count must lie in [0, " + std::to_string(kMaxFillers) + "]");
  }
  auto bank = filler_bank();
  if (seed != 0) {
    Rng rng(seed);
    rng.shuffle(std::span<std::string>(bank));
  }
  bank.resize(static_cast<std::size_t>(std::min<int>(count, static_cast<int>(bank.size()))));
  return bank;
}

namespace detail {

class FillerStream {
 public:
  explicit FillerStream(std::uint64_t seed) : bank_(make_fillers(kMaxFillers, seed)) {}
  const std::string& next() {
    const auto& s = bank_[cursor_ % bank_.size()];
    ++cursor_;
    return s;
  }

 private:
  std::vector<std::string> bank_;
  std::size_t cursor_ = 0;
};

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

// Inserts filler sentences into every gap between consecutive clauses until
// each gap's estimated token count reaches tokens_per_gap.
inline PromptInstance pad_prompt(const PromptInstance& inst, int tokens_per_gap,
                                 const TokenEstimator& estimate = word_count_estimator(),
                                 std::uint64_t seed = 0) {
  if (tokens_per_gap < 0 || tokens_per_gap > kMaxTokensPerGap) {
    throw ContractError("tokens_per_gap must lie in [0, " + std::to_string(kMaxTokensPerGap) +
                        "]");
  }
  if (tokens_per_gap == 0 || inst.n() < 2) return inst;
  if (!inst.layout) throw ContractError("prompt instance has no template to re-render with");

  detail::FillerStream stream(seed);
  auto gaps = inst.gap_fillers;
  gaps.resize(static_cast<std::size_t>(inst.n() - 1));
  const std::string sep = inst.layout->joiner;
  for (auto& gap : gaps) {
    while (estimate(detail::join(gap, sep)) < tokens_per_gap) gap.push_back(stream.next());
  }
  return render_prompt(inst.layout, inst.matrix, inst.query, std::move(gaps));
}

// Spreads filler sentences over the gaps until the whole prompt's estimated
// length reaches target_tokens. Overshoot is at most one filler sentence.
inline PromptInstance pad_to_length(const PromptInstance& inst, double target_tokens,
                                    const TokenEstimator& estimate = word_count_estimator(),
                                    std::uint64_t seed = 0) {
  if (inst.n() < 2 || estimate(inst.text) >= target_tokens) return inst;
  if (!inst.layout) throw ContractError("prompt instance has no template to re-render with");

  detail::FillerStream stream(seed);
  auto gaps = inst.gap_fillers;
  gaps.resize(static_cast<std::size_t>(inst.n() - 1));
  PromptInstance out = inst;
  while (estimate(out.text) < target_tokens) {
    auto shortest = std::min_element(gaps.begin(), gaps.end(),
                                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    shortest->push_back(stream.next());
    out = render_prompt(inst.layout, inst.matrix, inst.query, gaps);
  }
  return out;
}

// Estimated tokens contributed by inserted fillers alone.
inline double filler_tokens(const PromptInstance& inst, const TokenEstimator& estimate) {
  double total = 0.0;
  for (const auto& gap : inst.gap_fillers) {
    for (const auto& f : gap) total += estimate(f);
  }
  return total;
}

}  // namespace bindlab
