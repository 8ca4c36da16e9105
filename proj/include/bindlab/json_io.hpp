#pragma once

// JSON and JSONL wire formats shared with the model harness. Requires
// nlohmann/json ("json.hpp") on the include path.

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bindlab/analysis.hpp"
#include "bindlab/catalog.hpp"
#include "bindlab/counterfactual.hpp"
#include "bindlab/dataset.hpp"
#include "bindlab/errors.hpp"
#include "bindlab/mixture.hpp"
#include "bindlab/task.hpp"

namespace bindlab::io {

using json = nlohmann::ordered_json;

namespace detail {

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

inline json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

inline std::optional<std::string> opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace detail

// Span

inline json to_json(const Span& s) {
  return {{"group", s.group},
          {"column", s.column},
          {"begin", s.begin},
          {"end", s.end},
          {"in_question", s.in_question}};
}

inline Span span_from_json(const json& j) {
  return Span{detail::field<int>(j, "group"), detail::field<int>(j, "column"),
              detail::field<std::size_t>(j, "begin"), detail::field<std::size_t>(j, "end"),
              j.value("in_question", false)};
}

// PromptInstance: {task, text, matrix, q_group, t_entity, answer, spans, gap_fillers}

inline json to_json(const PromptInstance& p) {
  json spans = json::array();
  for (const auto& s : p.spans) spans.push_back(to_json(s));
  json out{{"task", p.layout ? p.layout->id : ""},
           {"text", p.text},
           {"matrix", p.matrix.rows()},
           {"q_group", p.query.q_group},
           {"t_entity", p.query.t_entity},
           {"answer", p.answer},
           {"spans", spans}};
  if (!p.gap_fillers.empty()) out["gap_fillers"] = p.gap_fillers;
  return out;
}

inline PromptInstance prompt_from_json(const json& j) {
  PromptInstance p;
  const auto task = j.value("task", std::string{});
  if (!task.empty()) p.layout = find_task(task);
  p.text = detail::field<std::string>(j, "text");
  p.matrix = BindingMatrix(detail::field<std::vector<std::vector<std::string>>>(j, "matrix"));
  p.query = QuerySpec::make(detail::field<int>(j, "q_group"), detail::field<int>(j, "t_entity"),
                            p.matrix.columns());
  p.answer = detail::field<std::string>(j, "answer");
  for (const auto& s : detail::field<json>(j, "spans")) p.spans.push_back(span_from_json(s));
  if (j.contains("gap_fillers")) {
    p.gap_fillers = j["gap_fillers"].get<std::vector<std::vector<std::string>>>();
  }
  for (const auto& s : p.spans) {
    if (s.end > p.text.size() || s.begin > s.end) throw ParseError("span outside prompt text");
  }
  return p;
}

// CounterfactualPair

inline json to_json(const CounterfactualPair& pair, const std::string& id) {
  json alignment = json::array();
  for (const auto& a : pair.alignment) {
    alignment.push_back(
        {{"entity", a.entity}, {"source", to_json(a.source)}, {"dest", to_json(a.dest)}});
  }
  const auto& o = pair.original;
  json out{{"id", id},
           {"kind", to_string(pair.kind)},
           {"task", o.layout ? o.layout->id : ""},
           {"n", o.n()},
           {"m", o.m()},
           {"t_entity", o.query.t_entity},
           {"indices", {{"i_p", pair.indices.i_p}, {"i_l", pair.indices.i_l}, {"i_r", pair.indices.i_r}}},
           {"original", to_json(o)},
           {"counterfactual", to_json(pair.counterfactual)},
           {"predicted",
            {{"none", pair.predicted.none},
             {"positional", detail::opt(pair.predicted.positional)},
             {"lexical", detail::opt(pair.predicted.lexical)},
             {"reflexive", detail::opt(pair.predicted.reflexive)}}},
           {"alignment", alignment}};
  if (pair.agreement) {
    out["agreement"] = *pair.agreement == AgreementKind::PosRef ? "pos-ref" : "pos-lex";
  }
  return out;
}

inline CounterfactualPair pair_from_json(const json& j) {
  CounterfactualPair pair;
  pair.kind = parse_pair_kind(detail::field<std::string>(j, "kind"));
  pair.original = prompt_from_json(detail::field<json>(j, "original"));
  pair.counterfactual = prompt_from_json(detail::field<json>(j, "counterfactual"));
  const auto ix = detail::field<json>(j, "indices");
  pair.indices = {detail::field<int>(ix, "i_p"), detail::field<int>(ix, "i_l"),
                  detail::field<int>(ix, "i_r")};
  const auto pred = detail::field<json>(j, "predicted");
  pair.predicted.none = detail::field<std::string>(pred, "none");
  pair.predicted.positional = detail::opt_string(pred, "positional");
  pair.predicted.lexical = detail::opt_string(pred, "lexical");
  pair.predicted.reflexive = detail::opt_string(pred, "reflexive");
  for (const auto& a : j.value("alignment", json::array())) {
    pair.alignment.push_back({span_from_json(detail::field<json>(a, "source")),
                              span_from_json(detail::field<json>(a, "dest")),
                              detail::field<std::string>(a, "entity")});
  }
  if (j.contains("agreement")) {
    const auto a = j["agreement"].get<std::string>();
    if (a == "pos-ref") pair.agreement = AgreementKind::PosRef;
    else if (a == "pos-lex") pair.agreement = AgreementKind::PosLex;
    else throw ParseError("unknown agreement kind '" + a + "'");
  }
  return pair;
}

// DistributionRecord

inline json to_json(const DistributionRecord& r) {
  return {{"task", r.task},
          {"model_name", r.model_name},
          {"layer", r.layer},
          {"n", r.n},
          {"m", r.m},
          {"t_entity", r.t_entity},
          {"i_p", r.indices.i_p},
          {"i_l", r.indices.i_l},
          {"i_r", r.indices.i_r},
          {"probs", r.probs},
          {"n_samples", r.n_samples},
          {"synthetic", r.synthetic}};
}

inline DistributionRecord record_from_json(const json& j) {
  DistributionRecord r;
  r.task = j.value("task", std::string{});
  r.model_name = j.value("model_name", std::string{});
  r.layer = j.value("layer", 0);
  r.n = detail::field<int>(j, "n");
  r.m = j.value("m", 0);
  r.t_entity = detail::field<int>(j, "t_entity");
  r.indices = {detail::field<int>(j, "i_p"), detail::field<int>(j, "i_l"),
               detail::field<int>(j, "i_r")};
  r.probs = detail::field<std::vector<double>>(j, "probs");
  r.n_samples = j.value("n_samples", kDefaultSamplesPerTriple);
  r.synthetic = j.value("synthetic", false);
  r.validate();
  return r;
}

// LabeledOutcome

inline json to_json(const LabeledOutcome& r) {
  json out{{"id", r.id},
           {"task", r.task},
           {"n", r.n},
           {"t_entity", r.t_entity},
           {"q_group", r.q_group},
           {"i_p", r.indices.i_p},
           {"i_l", r.indices.i_l},
           {"i_r", r.indices.i_r},
           {"observed", detail::opt(r.observed)},
           {"label", to_string(r.label.kind)}};
  if (r.label.kind == EffectKind::Mixed) out["mixed_index"] = r.label.mixed_index;
  return out;
}

inline LabeledOutcome outcome_from_json(const json& j) {
  LabeledOutcome r;
  r.id = j.value("id", std::string{});
  r.task = j.value("task", std::string{});
  r.n = detail::field<int>(j, "n");
  r.t_entity = j.value("t_entity", 1);
  r.q_group = detail::field<int>(j, "q_group");
  r.indices = {detail::field<int>(j, "i_p"), detail::field<int>(j, "i_l"),
               detail::field<int>(j, "i_r")};
  r.observed = detail::opt_string(j, "observed");
  r.label.kind = parse_effect_kind(detail::field<std::string>(j, "label"));
  if (r.label.kind == EffectKind::Mixed) {
    r.label.mixed_index = detail::field<int>(j, "mixed_index");
    if (r.label.mixed_index < 1 || r.label.mixed_index > r.n) {
      throw ParseError("mixed_index outside [1, n]");
    }
  }
  for (int v : {r.indices.i_p, r.indices.i_l, r.indices.i_r, r.q_group}) {
    if (v < 1 || v > r.n) throw ParseError("labeled record index outside [1, n]");
  }
  return r;
}

// Parameters: {n, t_entity, w_pos, alpha, beta, gamma, w_lex, w_ref, variant,
// oracle_space?, oracle_table?}

struct ParamsDocument {
  MixtureParameters params;
  VariantSpec variant;
  int t_entity = 1;
};

inline json to_json(const ParamsDocument& d) {
  const auto& p = d.params;
  json out{{"n", p.n},
           {"t_entity", d.t_entity},
           {"w_pos", p.w_pos},
           {"alpha", p.alpha},
           {"beta", p.beta},
           {"gamma", p.gamma},
           {"w_lex", p.w_lex},
           {"w_ref", p.w_ref},
           {"variant", d.variant.name}};
  if (d.variant.positional == PositionalForm::Oracle) {
    out["oracle_space"] = d.variant.oracle_space == OracleSpace::Log ? "log" : "probability";
    if (d.variant.oracle_table) out["oracle_table"] = *d.variant.oracle_table;
  }
  return out;
}

inline ParamsDocument params_from_json(const json& j) {
  ParamsDocument d;
  d.params.n = detail::field<int>(j, "n");
  d.t_entity = j.value("t_entity", 1);
  d.params.w_pos = detail::field<double>(j, "w_pos");
  d.params.alpha = detail::field<double>(j, "alpha");
  d.params.beta = detail::field<double>(j, "beta");
  d.params.gamma = detail::field<double>(j, "gamma");
  d.params.w_lex = detail::field<std::vector<double>>(j, "w_lex");
  d.params.w_ref = detail::field<std::vector<double>>(j, "w_ref");
  d.params.validate();
  d.variant = build_variant(j.value("variant", std::string("M")));
  if (j.contains("oracle_space")) {
    const auto s = j["oracle_space"].get<std::string>();
    if (s == "log") d.variant.oracle_space = OracleSpace::Log;
    else if (s == "probability") d.variant.oracle_space = OracleSpace::Probability;
    else throw ParseError("unknown oracle_space '" + s + "'");
  }
  if (j.contains("oracle_table")) d.variant.oracle_table = j["oracle_table"].get<DistributionTable>();
  return d;
}

// JSONL helpers. Blank lines are skipped; errors carry the 1-based line number.

template <typename T, typename Parse>
std::vector<T> read_jsonl(std::istream& in, Parse parse) {
  std::vector<T> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> read_jsonl_file(const std::string& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_jsonl<T>(in, parse);
}

inline void write_line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

inline std::vector<DistributionRecord> read_records(const std::string& path) {
  return read_jsonl_file<DistributionRecord>(path, record_from_json);
}

inline std::vector<CounterfactualPair> read_pairs(const std::string& path) {
  return read_jsonl_file<CounterfactualPair>(path, pair_from_json);
}

inline std::vector<LabeledOutcome> read_outcomes(const std::string& path) {
  return read_jsonl_file<LabeledOutcome>(path, outcome_from_json);
}

}  // namespace bindlab::io
