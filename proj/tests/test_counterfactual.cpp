#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "bindlab/bindlab.hpp"

using namespace bindlab;

namespace {

const BindingMatrix kFourGroups({{"Ann", "ale"}, {"Joe", "jam"}, {"Pete", "pie"}, {"Tim", "tea"}});

CounterfactualPair worked_pair(FillPolicy policy = FillPolicy::Ordered) {
  return make_target_rebind(love_template(), kFourGroups, QuerySpec::make(4, 2, 2), {2, 1, 3}, 1, policy);
}

bool in_text(const PromptInstance& inst, const std::string& entity) {
  for (const auto& s : inst.spans) {
    if (inst.slice(s) == entity) return true;
  }
  return false;
}

}  // namespace

TEST(TargetRebind, WorkedExampleOrderedFill) {
  const auto pair = worked_pair();
  const BindingMatrix expected({{"Joe", "ale"}, {"Ann", "pie"}, {"Pete", "jam"}, {"Tim", "tea"}});
  EXPECT_EQ(pair.counterfactual.matrix, expected);
  EXPECT_EQ(pair.counterfactual.query.q_group, 2);
  EXPECT_EQ(pair.counterfactual.query_entities(), std::vector<std::string>{"Ann"});
  EXPECT_EQ(pair.predicted.none, "tea");
  EXPECT_EQ(pair.predicted.positional, "jam");
  EXPECT_EQ(pair.predicted.lexical, "ale");
  EXPECT_EQ(pair.predicted.reflexive, "pie");
  EXPECT_EQ(pair.original.text, "Ann loves ale, Joe loves jam, Pete loves pie, Tim loves tea. What does Tim love?");
  EXPECT_EQ(pair.counterfactual.text, "Joe loves ale, Ann loves pie, Pete loves jam, Tim loves tea. What does Ann love?");
}

TEST(TargetRebind, DerangementPinsOnlyTheQueriedRow) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto pair = make_target_rebind(love_template(), kFourGroups, QuerySpec::make(4, 2, 2),
                                         {2, 1, 3}, seed);
    const auto& cf = pair.counterfactual.matrix;
    EXPECT_EQ(cf.at(2, 1), "Ann");
    EXPECT_EQ(cf.at(2, 2), "pie");
    EXPECT_TRUE(cf.all_distinct());
    EXPECT_EQ(pair.predicted.positional, "jam");
  }
  const auto t = find_task("music");
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = sample_binding_matrix(*t, 8, seed);
    const MechanismIndices ix{3, 6, 1};
    const auto pair = make_target_rebind(t, g, QuerySpec::make(8, 2, 3), ix, seed);
    const auto& cf = pair.counterfactual.matrix;
    EXPECT_EQ(cf.at(3, 1), g.at(6, 1));
    EXPECT_EQ(cf.at(3, 3), g.at(6, 3));
    EXPECT_EQ(cf.at(3, 2), g.at(1, 2));
    EXPECT_TRUE(cf.all_distinct());
    // Each column is a permutation of the original column.
    for (int c = 1; c <= 3; ++c) {
      std::multiset<std::string> a, b;
      for (int r = 1; r <= 8; ++r) {
        a.insert(g.at(r, c));
        b.insert(cf.at(r, c));
      }
      EXPECT_EQ(a, b);
    }
    // Leftover cells avoid their original row.
    for (int c = 1; c <= 3; ++c) {
      for (int r = 1; r <= 8; ++r) {
        if (r == 3) continue;
        EXPECT_NE(cf.at(r, c), g.at(r, c)) << "seed " << seed << " r " << r << " c " << c;
      }
    }
  }
}

TEST(TargetRebind, RejectsNonSeparatingIndices) {
  const auto love = love_template();
  const auto q = QuerySpec::make(4, 2, 2);
  EXPECT_THROW(make_target_rebind(love, kFourGroups, q, {2, 2, 3}, 1), ConstructionError);
  EXPECT_THROW(make_target_rebind(love, kFourGroups, q, {4, 1, 3}, 1), ConstructionError);
  EXPECT_THROW(make_target_rebind(love, kFourGroups, q, {0, 1, 3}, 1), ConstructionError);
  const BindingMatrix small({{"Ann", "ale"}, {"Joe", "jam"}, {"Pete", "pie"}});
  EXPECT_THROW(make_target_rebind(love, small, QuerySpec::make(3, 2, 2), {1, 2, 3}, 1),
               ConstructionError);
  Rng rng(1);
  EXPECT_THROW(sample_separating(3, rng), ConstructionError);
}

TEST(TargetRebind, SeparationAndDereferenceabilityAcrossTasks) {
  for (const auto& t : all_tasks()) {
    for (int n : {4, 7, 20}) {
      for (int te = 1; te <= t->m(); ++te) {
        PairRequest req;
        req.task = t;
        req.n = n;
        req.t_entity = te;
        req.count = 20;
        req.seed = 31 * n + te;
        for (const auto& pair : generate_pairs(req)) {
          const auto& p = pair.predicted;
          std::set<std::string> distinct{p.none, *p.positional, *p.lexical, *p.reflexive};
          ASSERT_EQ(distinct.size(), 4u) << t->id;
          for (const auto& e : distinct) EXPECT_TRUE(in_text(pair.original, e));
          EXPECT_TRUE(separating(pair.indices, pair.original.query.q_group));
          EXPECT_EQ(classify_patch_effect(pair, *p.positional).kind, EffectKind::Positional);
          EXPECT_EQ(classify_patch_effect(pair, *p.lexical).kind, EffectKind::Lexical);
          EXPECT_EQ(classify_patch_effect(pair, *p.reflexive).kind, EffectKind::Reflexive);
          EXPECT_EQ(classify_patch_effect(pair, p.none).kind, EffectKind::Original);
          EXPECT_TRUE(pair.counterfactual.matrix.all_distinct());
        }
      }
    }
  }
}

TEST(TargetRebind, IndexMarginalsAreUniform) {
  PairRequest req;
  req.task = find_task("sports_events");
  req.n = 20;
  req.t_entity = 3;
  req.count = 10000;
  req.seed = 2024;
  std::map<int, int> hp, hl, hr, hq;
  for (int i = 0; i < req.count; ++i) {
    Rng rng(derive_seed(req.seed, static_cast<std::uint64_t>(i)));
    const auto d = sample_separating(req.n, rng);
    ++hp[d.indices.i_p];
    ++hl[d.indices.i_l];
    ++hr[d.indices.i_r];
    ++hq[d.q_group];
  }
  const double expect = req.count / 20.0;
  const double sd = std::sqrt(req.count * (1.0 / 20) * (19.0 / 20));
  for (const auto* h : {&hp, &hl, &hr, &hq}) {
    ASSERT_EQ(h->size(), 20u);
    for (const auto& [k, c] : *h) EXPECT_LE(std::abs(c - expect), 3 * sd + 1) << k;
  }
  // The generator path draws the same indices.
  const auto pair = generate_pair(req, 17);
  Rng rng(derive_seed(req.seed, 17));
  const auto d = sample_separating(req.n, rng);
  EXPECT_EQ(pair.indices, d.indices);
  EXPECT_EQ(pair.original.query.q_group, d.q_group);
}

TEST(TargetRebind, EveryDistinctTripleReachable) {
  const int n = 5;
  std::set<std::tuple<int, int, int>> seen;
  for (std::uint64_t s = 0; s < 5000; ++s) {
    Rng rng(s);
    const auto d = sample_separating(n, rng);
    seen.insert({d.indices.i_p, d.indices.i_l, d.indices.i_r});
  }
  EXPECT_EQ(seen.size(), 60u);  // 5 * 4 * 3
  std::set<std::tuple<int, int, int>> pinned;
  for (std::uint64_t s = 0; s < 5000; ++s) {
    Rng rng(s);
    const auto d = sample_separating(n, rng, true);
    EXPECT_EQ(d.q_group, n);
    pinned.insert({d.indices.i_p, d.indices.i_l, d.indices.i_r});
  }
  EXPECT_EQ(pinned.size(), 24u);  // 4 * 3 * 2
}

TEST(Dangling, LexicalQueryIsFresh) {
  const auto pair = make_dangling(love_template(), kFourGroups, QuerySpec::make(4, 2, 2), {2, 1, 3},
                                  DanglingPointer::Lexical, 5, FillPolicy::Ordered);
  EXPECT_EQ(pair.kind, PairKind::LexicalDangling);
  const auto q = pair.counterfactual.query_entities();
  ASSERT_EQ(q.size(), 1u);
  EXPECT_FALSE(kFourGroups.contains(q[0]));
  EXPECT_FALSE(in_text(pair.original, q[0]));
  EXPECT_TRUE(love_template()->roles[0].contains(q[0]));
  EXPECT_FALSE(pair.predicted.lexical.has_value());
  EXPECT_EQ(pair.predicted.positional, "jam");
  EXPECT_EQ(pair.predicted.reflexive, "pie");
  EXPECT_EQ(pair.counterfactual.answer, "pie");
}

TEST(Dangling, ReflexiveTargetIsFresh) {
  const auto pair = make_dangling(love_template(), kFourGroups, QuerySpec::make(4, 2, 2), {2, 1, 3},
                                  DanglingPointer::Reflexive, 5, FillPolicy::Ordered);
  EXPECT_EQ(pair.kind, PairKind::ReflexiveDangling);
  EXPECT_FALSE(kFourGroups.contains(pair.counterfactual.answer));
  EXPECT_TRUE(love_template()->roles[1].contains(pair.counterfactual.answer));
  EXPECT_FALSE(pair.predicted.reflexive.has_value());
  EXPECT_EQ(pair.predicted.lexical, "ale");
  EXPECT_EQ(pair.counterfactual.query_entities(), std::vector<std::string>{"Ann"});
}

TEST(Dangling, ExactlyTheDesignatedPredictionIsMissing) {
  for (const auto& t : all_tasks()) {
    for (auto kind : {PairKind::LexicalDangling, PairKind::ReflexiveDangling}) {
      PairRequest req;
      req.kind = kind;
      req.task = t;
      req.n = 20;
      req.t_entity = t->m();
      req.count = 10;
      req.seed = 3;
      for (const auto& pair : generate_pairs(req)) {
        const auto& p = pair.predicted;
        EXPECT_EQ(p.lexical.has_value(), kind != PairKind::LexicalDangling);
        EXPECT_EQ(p.reflexive.has_value(), kind != PairKind::ReflexiveDangling);
        EXPECT_TRUE(in_text(pair.original, *p.positional));
        if (kind == PairKind::LexicalDangling) {
          for (const auto& e : pair.counterfactual.query_entities()) EXPECT_FALSE(in_text(pair.original, e));
        } else {
          EXPECT_FALSE(in_text(pair.original, pair.counterfactual.answer));
        }
      }
    }
  }
}

TEST(Dangling, ExhaustedVocabularyIsCapacityError) {
  auto tiny = std::make_shared<TaskTemplate>(*love_template());
  tiny->roles[0].vocabulary = {"Ann", "Joe", "Pete", "Tim"};
  EXPECT_THROW(make_dangling(tiny, kFourGroups, QuerySpec::make(4, 2, 2), {2, 1, 3},
                             DanglingPointer::Lexical, 1),
               CapacityError);
}

TEST(Agreement, PositionalMeetsReflexiveOrLexical) {
  const auto t = find_task("music");
  const auto g = sample_binding_matrix(*t, 10, 4);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto a = make_agreement(t, g, QuerySpec::make(5, 1, 3), AgreementKind::PosRef, s);
    EXPECT_EQ(a.indices.i_p, a.indices.i_r);
    EXPECT_NE(a.indices.i_l, a.indices.i_p);
    EXPECT_NE(a.indices.i_p, 5);
    EXPECT_NE(a.indices.i_l, 5);
    const auto b = make_agreement(t, g, QuerySpec::make(5, 3, 3), AgreementKind::PosLex, s);
    EXPECT_EQ(b.indices.i_p, b.indices.i_l);
    EXPECT_NE(b.indices.i_r, b.indices.i_p);
    for (const auto* pair : {&a, &b}) {
      const auto& p = pair->predicted;
      std::set<std::string> non_none{*p.positional, *p.lexical, *p.reflexive};
      EXPECT_EQ(non_none.size(), 2u);
      EXPECT_FALSE(non_none.contains(p.none));
    }
  }
  EXPECT_THROW(make_agreement(t, g, QuerySpec::make(5, 3, 3), AgreementKind::PosRef, 0), ContractError);
  EXPECT_THROW(make_agreement(t, g, QuerySpec::make(5, 1, 3), AgreementKind::PosLex, 0), ContractError);
  EXPECT_THROW(make_agreement(t, g, QuerySpec::make(5, 2, 3), AgreementKind::PosLex, 0), ContractError);
}

TEST(EntitySwap, BoxesPosLexRef) {
  const auto boxes = find_task("boxes");
  const BindingMatrix g({{"pen", "A"}, {"ball", "Q"}});
  const auto pos = make_entity_swap(PairKind::PosSwap, boxes, g, 2);
  EXPECT_EQ(pos.original.text, "The pen is in box A, and the ball is in box Q. Which box is the ball in?");
  EXPECT_EQ(pos.counterfactual.text, "The ball is in box Q, and the pen is in box A. Which box is the ball in?");
  EXPECT_EQ(pos.predicted.none, "Q");
  EXPECT_EQ(pos.predicted.positional, "A");

  const auto lex = make_entity_swap(PairKind::LexSwap, boxes, g, 2);
  EXPECT_EQ(lex.counterfactual.text, "The ball is in box A, and the pen is in box Q. Which box is the ball in?");
  EXPECT_EQ(lex.predicted.lexical, "A");

  const auto ref = make_entity_swap(PairKind::RefSwap, boxes, g, 2);
  EXPECT_EQ(ref.original.text, "The pen is in box A, and the ball is in box Q. What is in Box Q?");
  EXPECT_EQ(ref.counterfactual.text, "The ball is in box A, and the pen is in box Q. What is in Box Q?");
  EXPECT_EQ(ref.predicted.none, "ball");
  EXPECT_EQ(ref.predicted.reflexive, "pen");

  for (const auto* pair : {&pos, &lex, &ref}) {
    ASSERT_EQ(pair->alignment.size(), 2u);
    std::set<std::size_t> src, dst;
    for (const auto& a : pair->alignment) {
      EXPECT_EQ(pair->counterfactual.slice(a.source), a.entity);
      EXPECT_EQ(pair->original.slice(a.dest), a.entity);
      src.insert(a.source.begin);
      dst.insert(a.dest.begin);
    }
    EXPECT_EQ(src.size(), 2u);
    EXPECT_EQ(dst.size(), 2u);
    EXPECT_THROW(intervention_table(*pair), ContractError);
  }
}

TEST(EntitySwap, AllTasksAndErrors) {
  for (const auto& t : all_tasks()) {
    for (auto kind : {PairKind::PosSwap, PairKind::LexSwap, PairKind::RefSwap}) {
      const auto g = sample_binding_matrix(*t, 2, 9);
      const auto pair = make_entity_swap(kind, t, g, std::uint64_t{9});
      EXPECT_TRUE(pair.counterfactual.matrix.all_distinct());
      EXPECT_NE(pair.original.text, pair.counterfactual.text);
    }
  }
  const auto boxes = find_task("boxes");
  EXPECT_THROW(make_entity_swap(PairKind::PosSwap, boxes, sample_binding_matrix(*boxes, 3, 1), 1),
               ContractError);
  auto no_ref = std::make_shared<TaskTemplate>(*boxes);
  no_ref->questions.erase(1);
  EXPECT_THROW(make_entity_swap(PairKind::RefSwap, no_ref, sample_binding_matrix(*boxes, 2, 1), 1),
               ContractError);
}

TEST(ClassifyPatchEffect, FullLabelMapOnWorkedExample) {
  const auto pair = worked_pair();
  EXPECT_EQ(classify_patch_effect(pair, "jam"), (PatchEffectLabel{EffectKind::Positional, 0}));
  EXPECT_EQ(classify_patch_effect(pair, "tea"), (PatchEffectLabel{EffectKind::Original, 0}));
  EXPECT_EQ(classify_patch_effect(pair, "ale"), (PatchEffectLabel{EffectKind::Lexical, 0}));
  EXPECT_EQ(classify_patch_effect(pair, "pie"), (PatchEffectLabel{EffectKind::Reflexive, 0}));
  // Entities outside the target column and strangers are out of set.
  for (const std::string s : {"Ann", "Joe", "Pete", "Tim", "cod", "", "JAM"}) {
    EXPECT_EQ(classify_patch_effect(pair, s).kind, EffectKind::OutOfSet) << s;
  }
  // Group-index form.
  EXPECT_EQ(classify_patch_effect(pair, 2).kind, EffectKind::Positional);
  EXPECT_EQ(classify_patch_effect(pair, 1).kind, EffectKind::Lexical);
  EXPECT_EQ(classify_patch_effect(pair, 3).kind, EffectKind::Reflexive);
  EXPECT_EQ(classify_patch_effect(pair, 4).kind, EffectKind::Original);
  EXPECT_EQ(classify_patch_effect(pair, 0).kind, EffectKind::OutOfSet);
  EXPECT_EQ(classify_patch_effect(pair, 5).kind, EffectKind::OutOfSet);
}

TEST(ClassifyPatchEffect, MixedAtEveryOtherRow) {
  const auto t = find_task("biology_experiment");
  const auto g = sample_binding_matrix(*t, 12, 2);
  const auto pair = make_target_rebind(t, g, QuerySpec::make(12, 2, 3), {4, 8, 1}, 3);
  for (int k = 1; k <= 12; ++k) {
    const auto label = classify_patch_effect(pair, g.at(k, 2));
    switch (k) {
      case 12: EXPECT_EQ(label.kind, EffectKind::Original); break;
      case 4: EXPECT_EQ(label.kind, EffectKind::Positional); break;
      case 8: EXPECT_EQ(label.kind, EffectKind::Lexical); break;
      case 1: EXPECT_EQ(label.kind, EffectKind::Reflexive); break;
      default: EXPECT_EQ(label, (PatchEffectLabel{EffectKind::Mixed, k}));
    }
  }
}

TEST(PairKinds, NamesRoundTrip) {
  for (auto k : {PairKind::TargetRebind, PairKind::PosSwap, PairKind::LexSwap, PairKind::RefSwap,
                 PairKind::LexicalDangling, PairKind::ReflexiveDangling, PairKind::Agreement,
                 PairKind::Identity}) {
    EXPECT_EQ(parse_pair_kind(to_string(k)), k);
  }
  for (auto k : kAllEffects) EXPECT_EQ(parse_effect_kind(to_string(k)), k);
  EXPECT_THROW(parse_pair_kind("bogus"), ParseError);
}
