// bindlab: command-line front end for generation, fitting and reporting.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bindlab/bindlab.hpp"
#include "bindlab/json_io.hpp"

namespace fs = std::filesystem;
using namespace bindlab;
using io::json;

namespace {

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

FillPolicy parse_fill(const std::string& s) {
  if (s == "derangement") return FillPolicy::Derangement;
  if (s == "ordered") return FillPolicy::Ordered;
  throw ParseError("unknown fill policy '" + s + "'");
}

// Generator parameters shared by synth and sweep-n.
struct TruthArgs {
  double w_pos = 5.0, alpha = 2.0, beta = -2.0, gamma = 1.0, w_lex = 3.0, w_ref = 4.0;

  void add(CLI::App* app) {
    app->add_option("--w-pos", w_pos, "positional weight")->capture_default_str();
    app->add_option("--alpha", alpha)->capture_default_str();
    app->add_option("--beta", beta)->capture_default_str();
    app->add_option("--gamma", gamma)->capture_default_str();
    app->add_option("--w-lex", w_lex, "lexical weight at every index")->capture_default_str();
    app->add_option("--w-ref", w_ref, "reflexive weight at every index")->capture_default_str();
  }

  MixtureParameters make(int n) const {
    auto p = MixtureParameters::initial(n);
    p.w_pos = w_pos;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = gamma;
    std::fill(p.w_lex.begin(), p.w_lex.end(), w_lex);
    std::fill(p.w_ref.begin(), p.w_ref.end(), w_ref);
    return p;
  }
};

// ---- gen

struct GenArgs {
  std::string task;
  int n = 4, t_entity = 1, count = 1, pad_tokens = 0;
  std::uint64_t seed = 0;
  std::string out = "-";
};

void run_gen(const GenArgs& a) {
  const auto layout = find_task(a.task);
  const auto estimator = word_count_estimator();
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (a.out != "-") {
    file = open_out(a.out);
    out = &file;
  }
  for (int i = 0; i < a.count; ++i) {
    const auto s = derive_seed(a.seed, static_cast<std::uint64_t>(i));
    Rng rng(s);
    const auto g = sample_binding_matrix(*layout, a.n, derive_seed(s, 1));
    auto inst = render_prompt(layout, g, QuerySpec::make(rng.between(1, a.n), a.t_entity, layout->m()));
    if (a.pad_tokens > 0) inst = pad_prompt(inst, a.pad_tokens, estimator, derive_seed(s, 2));
    io::write_line(*out, io::to_json(inst));
  }
}

// ---- pairs

struct PairsArgs {
  std::string kind = "target-rebind";
  std::string task;
  int n = 4, t_entity = 1, count = 1;
  std::uint64_t seed = 0;
  bool pin_query_last = false;
  std::string fill = "derangement";
  std::string out = "-";
};

void run_pairs(const PairsArgs& a) {
  PairRequest req;
  req.kind = parse_pair_kind(a.kind);
  req.task = find_task(a.task);
  req.n = a.n;
  req.t_entity = a.t_entity;
  req.count = a.count;
  req.seed = a.seed;
  req.pin_query_last = a.pin_query_last;
  req.fill = parse_fill(a.fill);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (a.out != "-") {
    file = open_out(a.out);
    out = &file;
  }
  for (int i = 0; i < a.count; ++i) {
    const auto pair = generate_pair(req, static_cast<std::size_t>(i));
    io::write_line(*out, io::to_json(pair, a.task + "-" + std::to_string(i)));
  }
}

// ---- synth

struct SynthArgs {
  int n = 20, t_entity = 1;
  std::string variant = "M";
  std::optional<double> noise;
  std::uint64_t seed = 0;
  bool distinct_only = false;
  std::string params;
  std::string out;
  TruthArgs truth;
};

void run_synth(const SynthArgs& a) {
  MixtureParameters truth;
  VariantSpec variant;
  if (!a.params.empty()) {
    const auto doc = io::params_from_json(read_json_file(a.params));
    truth = doc.params;
    variant = doc.variant;
  } else {
    truth = a.truth.make(a.n);
    variant = build_variant(a.variant);
  }
  SynthOptions opts;
  opts.t_entity = a.t_entity;
  opts.noise_concentration = a.noise;
  opts.seed = a.seed;
  opts.distinct_only = a.distinct_only;
  auto out = open_out(a.out);
  for (const auto& r : synth_dataset(truth, variant, opts)) io::write_line(out, io::to_json(r));
}

// ---- fit

struct FitArgs {
  std::string records;
  int t_entity = 1;
  std::string variant = "M";
  std::string oracle_space = "log";
  FitConfig cfg;
  std::string out;
  std::string trace;
};

OracleSpace parse_space(const std::string& s) {
  if (s == "log") return OracleSpace::Log;
  if (s == "probability") return OracleSpace::Probability;
  throw ParseError("unknown oracle space '" + s + "'");
}

void run_fit(const FitArgs& a) {
  const auto split = assemble_dataset(io::read_records(a.records), a.t_entity, a.cfg.seed);
  const int n = split.train.front().n;
  auto variant = build_variant(a.variant);
  if (variant.positional == PositionalForm::Oracle) {
    variant.oracle_space = parse_space(a.oracle_space);
    variant.oracle_table = oracle_table_from_records(split.train, n);
  }
  const auto result = fit_mixture(split, variant, a.cfg);
  auto out = open_out(a.out);
  out << io::to_json(io::ParamsDocument{result.params, variant, a.t_entity}).dump(2) << '\n';
  if (!a.trace.empty()) {
    auto t = open_out(a.trace);
    t << "epoch,train_jsd,val_jsd,best_val_jsd,improved\n";
    for (const auto& row : result.trace) {
      t << row.epoch << ',' << fmt(row.train_jsd) << ',' << fmt(row.val_jsd) << ','
        << fmt(row.best_val_jsd) << ',' << (row.improved ? 1 : 0) << '\n';
    }
  }
  std::cerr << "fit " << variant.name << ": " << split.train.size() << "/" << split.val.size()
            << "/" << split.test.size() << " records, best epoch " << result.best_epoch
            << ", val JSD " << fmt(result.trace.empty() ? 0.0 : result.trace.back().best_val_jsd)
            << (result.stopped_early ? " (early stop)" : "") << '\n';
}

// ---- eval

struct EvalArgs {
  std::string records;
  std::vector<std::string> params;
  std::optional<int> t_entity;
  std::string split = "test";
  int bootstrap = kDefaultBootstrap;
  std::uint64_t seed = 0;
  std::string out = "-";
};

void run_eval(const EvalArgs& a) {
  const auto all = io::read_records(a.records);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (a.out != "-") {
    file = open_out(a.out);
    out = &file;
  }
  *out << "variant,t_entity,jss,jss_ci,kl_tp,kl_tp_ci,kl_pt,kl_pt_ci\n";
  for (const auto& path : a.params) {
    const auto doc = io::params_from_json(read_json_file(path));
    const int t = a.t_entity.value_or(doc.t_entity);
    const auto split = assemble_dataset(all, t, a.seed);
    const std::vector<DistributionRecord>* part = &split.test;
    std::vector<DistributionRecord> everything;
    if (a.split == "train") part = &split.train;
    else if (a.split == "val") part = &split.val;
    else if (a.split == "all") {
      everything = split.train;
      everything.insert(everything.end(), split.val.begin(), split.val.end());
      everything.insert(everything.end(), split.test.begin(), split.test.end());
      part = &everything;
    } else if (a.split != "test") {
      throw ParseError("unknown split '" + a.split + "'");
    }
    const auto r = evaluate(doc.params, doc.variant, *part, a.bootstrap, derive_seed(a.seed, 99));
    *out << r.variant << ',' << r.t_entity << ',' << fmt(r.jss.mean) << ','
         << fmt(r.jss.ci.half_width()) << ',' << fmt(r.kl_tp.mean) << ','
         << fmt(r.kl_tp.ci.half_width()) << ',' << fmt(r.kl_pt.mean) << ','
         << fmt(r.kl_pt.ci.half_width()) << '\n';
  }
}

// ---- label

struct LabelArgs {
  std::string pairs;
  std::string observations;
  std::string simulate;
  std::uint64_t seed = 0;
  std::string out = "-";
};

void run_label(const LabelArgs& a) {
  const auto pairs = io::read_jsonl_file<std::pair<std::string, CounterfactualPair>>(
      a.pairs, [](const json& j) { return std::make_pair(j.value("id", std::string{}), io::pair_from_json(j)); });
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (a.out != "-") {
    file = open_out(a.out);
    out = &file;
  }
  if (!a.observations.empty()) {
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < pairs.size(); ++i) by_id[pairs[i].first] = i;
    const auto obs = io::read_jsonl_file<json>(a.observations, [](const json& j) { return j; });
    for (const auto& o : obs) {
      const auto id = o.at("id").get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) throw DatasetError("observation for unknown pair id '" + id + "'");
      const auto& pair = pairs[it->second].second;
      const auto& v = o.at("observed");
      LabeledOutcome rec;
      if (v.is_number_integer()) {
        const int k = v.get<int>();
        rec = label_outcome(pair, "", id);
        rec.label = classify_patch_effect(pair, k);
        rec.observed = (k >= 1 && k <= pair.original.n())
                           ? std::optional<std::string>(pair.original.matrix.at(k, pair.original.query.t_entity))
                           : std::nullopt;
      } else {
        rec = label_outcome(pair, v.get<std::string>(), id);
      }
      io::write_line(*out, io::to_json(rec));
    }
    return;
  }
  if (a.simulate.empty()) throw ConfigurationError("label needs --observations or --simulate");
  const auto doc = io::params_from_json(read_json_file(a.simulate));
  Rng rng(a.seed);
  for (const auto& [id, pair] : pairs) {
    if (pair.original.n() != doc.params.n) {
      throw DatasetError("pair '" + id + "' has n different from the simulator parameters");
    }
    const int k = simulate_response(doc.params, doc.variant, pair.indices, rng);
    const auto observed = pair.original.matrix.at(k, pair.original.query.t_entity);
    io::write_line(*out, io::to_json(label_outcome(pair, observed, id)));
  }
}

// ---- report

struct ReportArgs {
  std::string records;
  std::string kind = "ucurve";
  std::string axis = "i_p";
  std::vector<std::string> fix;
  std::string out = "report";
};

void write_curve(const EffectCurve& curve, const std::string& stem, const std::string& kind) {
  auto csv = open_out(stem + ".csv");
  csv << to_string(curve.axis) << ",count";
  for (auto k : kAllEffects) csv << ',' << to_string(k);
  csv << '\n';
  for (const auto& b : curve.buckets) {
    csv << b.key << ',' << b.count;
    for (auto k : kAllEffects) csv << ',' << fmt(b.share(k));
    csv << '\n';
  }
  json labels = json::array();
  for (auto k : kAllEffects) labels.push_back(to_string(k));
  json side{{"kind", kind},
            {"axis", to_string(curve.axis)},
            {"total", curve.total()},
            {"labels", labels},
            {"empty_keys", curve.empty_keys}};
  open_out(stem + ".json") << side.dump(2) << '\n';
  for (int k : curve.empty_keys) {
    std::cerr << "warning: no records at " << to_string(curve.axis) << " = " << k << '\n';
  }
}

void run_report(const ReportArgs& a) {
  fs::create_directories(a.out);
  const std::string dir = a.out + "/";
  if (a.kind == "ucurve" || a.kind == "n-sweep") {
    const auto recs = io::read_outcomes(a.records);
    const auto curve = a.kind == "ucurve" ? ucurve(recs, parse_axis(a.axis)) : n_sweep_summary(recs);
    write_curve(curve, dir + (a.kind == "ucurve" ? "ucurve" : "n_sweep"), a.kind);
  } else if (a.kind == "confusion") {
    const auto recs = io::read_outcomes(a.records);
    const auto cm = confusion(recs);
    auto csv = open_out(dir + "confusion.csv");
    csv << "i_p";
    for (int j = 1; j <= cm.n; ++j) csv << ',' << j;
    csv << '\n';
    std::vector<std::size_t> row_counts;
    for (int i = 1; i <= cm.n; ++i) {
      csv << i;
      for (double v : cm.percent[i - 1]) csv << ',' << fmt(v);
      csv << '\n';
      row_counts.push_back(cm.row_count(i));
    }
    json excluded = json::object();
    for (const auto& [k, c] : cm.excluded) excluded[std::string(to_string(k))] = c;
    json side{{"kind", "confusion"},
              {"rows", "i_p"},
              {"cols", "observed group"},
              {"n", cm.n},
              {"included", cm.included},
              {"excluded", excluded},
              {"row_counts", row_counts}};
    open_out(dir + "confusion.json") << side.dump(2) << '\n';
  } else if (a.kind == "profile") {
    ProfileQuery q;
    for (const auto& f : a.fix) {
      const auto eq = f.find('=');
      if (eq == std::string::npos) throw ParseError("--fix expects name=value, got '" + f + "'");
      const auto name = f.substr(0, eq);
      const int v = std::stoi(f.substr(eq + 1));
      if (name == "i_p") q.i_p = v;
      else if (name == "i_l") q.i_l = v;
      else if (name == "i_r") q.i_r = v;
      else throw ParseError("unknown index '" + name + "'");
    }
    const auto prof = profile(io::read_records(a.records), q);
    auto csv = open_out(dir + "profile.csv");
    const char* names[] = {"i_p", "i_l", "i_r"};
    csv << names[static_cast<int>(prof.varied)] << ",count,peak,at_p,at_l,at_r";
    for (int j = 1; j <= prof.n; ++j) csv << ",p" << j;
    csv << '\n';
    for (const auto& row : prof.rows) {
      csv << row.value << ',' << row.count << ',' << row.peak << ',' << fmt(row.at_p) << ','
          << fmt(row.at_l) << ',' << fmt(row.at_r);
      for (double v : row.mean) csv << ',' << fmt(v);
      csv << '\n';
    }
    json fixed = json::object();
    if (q.i_p) fixed["i_p"] = *q.i_p;
    if (q.i_l) fixed["i_l"] = *q.i_l;
    if (q.i_r) fixed["i_r"] = *q.i_r;
    json side{{"kind", "profile"},
              {"varied", names[static_cast<int>(prof.varied)]},
              {"fixed", fixed},
              {"n", prof.n},
              {"missing", prof.missing},
              {"partial", prof.partial()}};
    open_out(dir + "profile.json") << side.dump(2) << '\n';
    if (prof.partial()) std::cerr << "warning: profile is partial\n";
  } else {
    throw ParseError("unknown report kind '" + a.kind + "'");
  }
}

// ---- sweep-n

struct SweepArgs {
  std::string task;
  std::string kind = "target-rebind";
  int t_entity = 1;
  int n_min = 4, n_max = 20, count = 200;
  std::uint64_t seed = 0;
  std::string out = "sweep";
  TruthArgs truth;
};

void run_sweep(const SweepArgs& a) {
  PairRequest req;
  req.kind = parse_pair_kind(a.kind);
  req.task = find_task(a.task);
  req.t_entity = a.t_entity;
  req.count = a.count;
  const auto variant = build_variant("M");
  fs::create_directories(a.out);
  auto out = open_out(a.out + "/labeled.jsonl");
  std::vector<LabeledOutcome> all;
  for (int n = a.n_min; n <= a.n_max; ++n) {
    req.n = n;
    req.seed = derive_seed(a.seed, static_cast<std::uint64_t>(n));
    const auto params = a.truth.make(n);
    Rng rng(derive_seed(req.seed, 7));
    for (int i = 0; i < a.count; ++i) {
      const auto pair = generate_pair(req, static_cast<std::size_t>(i));
      const int k = simulate_response(params, variant, pair.indices, rng);
      const auto id = a.task + "-n" + std::to_string(n) + "-" + std::to_string(i);
      auto rec = label_outcome(pair, pair.original.matrix.at(k, a.t_entity), id);
      io::write_line(out, io::to_json(rec));
      all.push_back(std::move(rec));
    }
  }
  write_curve(n_sweep_summary(all), a.out + "/n_sweep", "n-sweep");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bindlab: entity binding tasks, counterfactual pairs and mixture-model fitting"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "render prompt instances as JSONL");
  g->add_option("--task", gen.task)->required();
  g->add_option("--n", gen.n)->capture_default_str();
  g->add_option("--t-entity", gen.t_entity)->capture_default_str();
  g->add_option("--count", gen.count)->capture_default_str();
  g->add_option("--pad-tokens", gen.pad_tokens, "filler tokens per gap")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "output path, - for stdout")->capture_default_str();

  PairsArgs pairs;
  auto* p = app.add_subcommand("pairs", "generate counterfactual pairs as JSONL");
  p->add_option("--kind", pairs.kind)
      ->check(CLI::IsMember({"target-rebind", "dangling-lex", "dangling-ref", "agreement",
                             "pos-swap", "lex-swap", "ref-swap", "identity"}))
      ->capture_default_str();
  p->add_option("--task", pairs.task)->required();
  p->add_option("--n", pairs.n)->capture_default_str();
  p->add_option("--t-entity", pairs.t_entity)->capture_default_str();
  p->add_option("--count", pairs.count)->capture_default_str();
  p->add_option("--seed", pairs.seed)->capture_default_str();
  p->add_flag("--pin-query-last", pairs.pin_query_last, "original query group fixed to n");
  p->add_option("--fill", pairs.fill, "leftover cells: derangement or ordered")->capture_default_str();
  p->add_option("--out", pairs.out)->capture_default_str();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "synthetic distribution records from known parameters");
  s->add_option("--n", synth.n)->capture_default_str();
  s->add_option("--t-entity", synth.t_entity)->capture_default_str();
  s->add_option("--variant", synth.variant)->capture_default_str();
  s->add_option("--noise", synth.noise, "Dirichlet concentration; omit for noiseless records");
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_flag("--distinct-only", synth.distinct_only, "only pairwise-distinct index triples");
  s->add_option("--params", synth.params, "read generator parameters from a params JSON file");
  s->add_option("--out", synth.out)->required();
  synth.truth.add(s);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "fit a mixture variant to distribution records");
  f->add_option("--records", fit.records)->required();
  f->add_option("--t-entity", fit.t_entity)->capture_default_str();
  f->add_option("--variant", fit.variant)->check(CLI::IsMember(variant_names()))->capture_default_str();
  f->add_option("--oracle-space", fit.oracle_space, "log or probability")->capture_default_str();
  f->add_option("--lr", fit.cfg.learning_rate)->capture_default_str();
  f->add_option("--epochs", fit.cfg.max_epochs)->capture_default_str();
  f->add_option("--batch", fit.cfg.batch_size)->capture_default_str();
  f->add_option("--patience", fit.cfg.early_stop_patience)->capture_default_str();
  f->add_option("--seed", fit.cfg.seed, "split and shuffle seed")->capture_default_str();
  f->add_option("--out", fit.out)->required();
  f->add_option("--trace", fit.trace, "per-epoch CSV trace");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "evaluate fitted parameters on a split");
  e->add_option("--records", ev.records)->required();
  e->add_option("--params", ev.params, "one or more params JSON files")->required();
  e->add_option("--t-entity", ev.t_entity, "defaults to the value stored with the parameters");
  e->add_option("--split", ev.split)->check(CLI::IsMember({"train", "val", "test", "all"}))->capture_default_str();
  e->add_option("--bootstrap", ev.bootstrap)->capture_default_str();
  e->add_option("--seed", ev.seed, "must match the fit seed to reuse its split")->capture_default_str();
  e->add_option("--out", ev.out)->capture_default_str();

  LabelArgs lab;
  auto* l = app.add_subcommand("label", "classify observed outputs of counterfactual pairs");
  l->add_option("--pairs", lab.pairs)->required();
  auto* obs = l->add_option("--observations", lab.observations, "JSONL {id, observed}");
  auto* sim = l->add_option("--simulate", lab.simulate, "params JSON used as a stand-in responder");
  obs->excludes(sim);
  l->add_option("--seed", lab.seed)->capture_default_str();
  l->add_option("--out", lab.out)->capture_default_str();

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "aggregate labeled outcomes or records into CSV + JSON");
  r->add_option("--records", rep.records)->required();
  r->add_option("--kind", rep.kind)
      ->check(CLI::IsMember({"ucurve", "confusion", "profile", "n-sweep"}))
      ->capture_default_str();
  r->add_option("--axis", rep.axis, "i_p, i_l, i_r or q_group")->capture_default_str();
  r->add_option("--fix", rep.fix, "profile: two fixed indices, e.g. i_p=6 i_r=14");
  r->add_option("--out", rep.out, "output directory")->capture_default_str();

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep-n", "generate and label pairs across n with a simulated responder");
  w->add_option("--task", sw.task)->required();
  w->add_option("--kind", sw.kind)->capture_default_str();
  w->add_option("--t-entity", sw.t_entity)->capture_default_str();
  w->add_option("--n-min", sw.n_min)->capture_default_str();
  w->add_option("--n-max", sw.n_max)->capture_default_str();
  w->add_option("--count", sw.count, "pairs per n")->capture_default_str();
  w->add_option("--seed", sw.seed)->capture_default_str();
  w->add_option("--out", sw.out, "output directory")->capture_default_str();
  sw.truth.add(w);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) run_gen(gen);
    else if (*p) run_pairs(pairs);
    else if (*s) run_synth(synth);
    else if (*f) run_fit(fit);
    else if (*e) run_eval(ev);
    else if (*l) run_label(lab);
    else if (*r) run_report(rep);
    else if (*w) run_sweep(sw);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
