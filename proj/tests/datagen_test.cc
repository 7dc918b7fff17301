// Copyright 2026 The KBQA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "kbqa/datagen.h"
#include "kbqa/error.h"
#include "kbqa/inference.h"
#include "kbqa/kb_store.h"
#include "kbqa/text.h"
#include "test_util.h"

namespace kbqa {
namespace {

using testing::Ent;
using testing::FixtureKb;
using testing::Rel;

TEST_CASE("templates validate their slots") {
  QuestionTemplate t = QuestionTemplate::Parse(
      "what is the {predicate} of the {type2} {subject} ?", kTripleSlots);
  CHECK(t.Fill({{"predicate", "nationality"},
                {"type2", "person"},
                {"subject", "barack_obama"}}) ==
        "what is the nationality of the person barack_obama ?");
  CHECK(t.Fill({{"predicate", "x"}, {"type2", ""}, {"subject", "s"}}) ==
        "what is the x of the s ?");
  CHECK_THROWS_AS(QuestionTemplate::Parse("{predicate} {subject}",
                                          kTripleSlots),
                  ConfigError);
  CHECK_THROWS_AS(
      QuestionTemplate::Parse("{predicate} {type2} {subject} {subject}",
                              kTripleSlots),
      ConfigError);
  CHECK_THROWS_AS(
      QuestionTemplate::Parse("{predicate} {type2} {subject} {x}",
                              kTripleSlots),
      ConfigError);
  CHECK_THROWS_AS(QuestionTemplate::Parse("{predicate {subject}",
                                          kOneHopSlots),
                  ConfigError);
  QuestionTemplate typed = QuestionTemplate::Parse(
      "which {type} is the {predicate} of {subject}", kOneHopSlots,
      kToyOptionalSlots);
  CHECK(typed.slots().size() == 3);
}

TEST_CASE("template sets load from json") {
  TemplateSet d = DefaultTemplates();
  TemplateSet s = ParseTemplateSet(
      R"({"one_hop": ["{predicate} of {subject} ?", "{subject} {predicate} ?"]})");
  CHECK(s.one_hop.size() == 2);
  CHECK(s.one_hop[1].pattern() == "{subject} {predicate} ?");
  CHECK(s.triple.pattern() == d.triple.pattern());
  CHECK(s.two_hop.size() == d.two_hop.size());
  CHECK_THROWS_AS(ParseTemplateSet("[1,2]"), ConfigError);
  CHECK_THROWS_AS(ParseTemplateSet("{"), ConfigError);
  CHECK_THROWS_AS(ParseTemplateSet(R"({"triple": "{subject}"})"),
                  ConfigError);
}

TEST_CASE("relation names split into words") {
  RelationWords w = SplitRelationName("people.person.place_of_birth");
  CHECK(w.type2 == "person");
  CHECK(w.predicate == "place of birth");
  RelationWords flat = SplitRelationName("born_in");
  CHECK(flat.type2.empty());
  CHECK(flat.predicate == "born in");
}

TEST_CASE("triples become questions") {
  KnowledgeGraph g = KnowledgeGraph::ParseString(
      "barack_obama\tpeople.person.nationality\tunited_states\n");
  auto qs = TriplesToQuestions(g, DefaultTemplates().triple);
  REQUIRE(qs.size() == 1);
  CHECK(qs[0].question ==
        "what is the nationality of the person barack_obama ?");
  CHECK(qs[0].answers.size() == 1);
  CHECK(qs[0].answers[0].end() == Ent(g, "united_states"));
  CHECK(TriplesToQuestions(KnowledgeGraph(), DefaultTemplates().triple)
            .empty());

  KnowledgeGraph f = FixtureKb();
  auto fq = TriplesToQuestions(f, DefaultTemplates().triple);
  CHECK(fq.size() == 4);
  for (const QaRecord &r : fq) {
    REQUIRE(r.answers.size() == 1);
    const AnswerPath &p = r.answers[0];
    CHECK(p.start() == r.entity);
    CHECK(f.HasEdge(p.start(), p.relations()[0], p.end()));
    CHECK(ResolveEntity(f, Tokenize(r.question)) == r.entity);
  }
}

TEST_CASE("QA files round trip and reject unknown symbols") {
  KnowledgeGraph g = FixtureKb();
  EntityId a = Ent(g, "A"), b = Ent(g, "B");
  RelationId born = Rel(g, "born_in"), cont = Rel(g, "contained_by");
  std::vector<QaRecord> records = {
      {"where was a born", a, {AnswerPath::OneHop(a, born, b)}},
      {"what holds a birthplace",
       a,
       {AnswerPath::TwoHop(a, born, b, cont, Ent(g, "C"))}},
      {"a facts",
       a,
       {AnswerPath::OneHop(a, born, b),
        AnswerPath::OneHop(a, Rel(g, "profession"), Ent(g, "D"))}}};
  std::stringstream io;
  WriteQaDataset(io, g, records);
  CHECK(io.str().find("born_in|contained_by>C") != std::string::npos);
  QaLoadResult loaded = LoadQaDataset(io, g);
  CHECK(loaded.rejected == 0);
  CHECK(loaded.records == records);
  CHECK(loaded.records[2].answers.size() == 2);

  std::istringstream mixed(
      "q1\tA\tborn_in>B\n"
      "q2\tA\tflies_to>B\n"
      "q3\tNobody\tborn_in>B\n"
      "q4\tA\tprofession>B\n"
      "q5\tA\tborn_in>B;profession>D\n");
  QaLoadResult r = LoadQaDataset(mixed, g);
  CHECK(r.records.size() == 2);
  CHECK(r.rejected == 3);
  CHECK(r.rejections.size() == 3);

  std::istringstream unknown_rel("q\tA\tnope>B\n");
  CHECK(LoadQaDataset(unknown_rel, g).rejected == 1);

  std::istringstream malformed("q\tA\n");
  CHECK_THROWS_AS(LoadQaDataset(malformed, g), ParseError);
  std::istringstream three("q\tA\ta|b|c>B\n");
  CHECK_THROWS_AS(LoadQaDataset(three, g), ParseError);
}

TEST_CASE("two hop intermediate is the lowest connecting entity") {
  KnowledgeGraph g = KnowledgeGraph::ParseString(
      "s\tr\tm2\ns\tr\tm1\nm1\tt\to\nm2\tt\to\n");
  std::istringstream in("q\ts\tr|t>o\n");
  QaLoadResult r = LoadQaDataset(in, g);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].answers[0].intermediate() ==
        std::min(Ent(g, "m1"), Ent(g, "m2")));
}

TEST_CASE("paraphrase files round trip") {
  std::vector<ParaphraseRecord> records = {
      {"c1", "where was a born"}, {"c1", "birthplace of a"}, {"c2", "x y"}};
  std::stringstream io;
  WriteParaphrases(io, records);
  CHECK(LoadParaphrases(io) == records);
  std::istringstream bad("no tab here\n");
  CHECK_THROWS_AS(LoadParaphrases(bad), ParseError);
}

ToyWorldConfig SmallWorld(uint64_t seed) {
  ToyWorldConfig c;
  c.entities = 80;
  c.relations = 8;
  c.train = 300;
  c.valid = 30;
  c.test = 50;
  c.seed = seed;
  return c;
}

TEST_CASE("toy world is deterministic") {
  ToyWorld a = MakeToyWorld(SmallWorld(4));
  ToyWorld b = MakeToyWorld(SmallWorld(4));
  CHECK(a.graph.triples() == b.graph.triples());
  CHECK(a.train == b.train);
  CHECK(a.valid == b.valid);
  CHECK(a.test == b.test);
  CHECK(a.paraphrases == b.paraphrases);
  ToyWorld c = MakeToyWorld(SmallWorld(5));
  CHECK_FALSE(c.train == a.train);
}

TEST_CASE("toy world questions are well formed") {
  for (uint64_t seed : {1, 2, 3}) {
    ToyWorld w = MakeToyWorld(SmallWorld(seed));
    const KnowledgeGraph &g = w.graph;
    CHECK(w.train.size() == 300);
    CHECK(w.valid.size() == 30);
    CHECK(w.test.size() == 50);
    size_t two_hop = 0;
    std::set<std::string> seen;
    std::set<EntityId> train_subjects, held_subjects;
    for (const auto *split : {&w.train, &w.valid, &w.test}) {
      for (const QaRecord &r : *split) {
        CHECK(seen.insert(r.question).second);
        (split == &w.train ? train_subjects : held_subjects).insert(r.entity);
        CHECK(ResolveEntity(g, Tokenize(r.question)) == r.entity);
        REQUIRE_FALSE(r.answers.empty());
        if (r.answers[0].hops() == 2) ++two_hop;

        // Gold answers are valid paths sharing one signature, and they are
        // all the entities reachable on that signature.
        std::set<AnswerPath> all;
        for (const auto &c : CandidatesAll2(g, r.entity).entries) {
          all.insert(c.path);
        }
        const AnswerPath &first = r.answers[0];
        std::set<EntityId> gold, reachable;
        for (const AnswerPath &p : r.answers) {
          CHECK(all.contains(p));
          CHECK(std::ranges::equal(p.relations(), first.relations()));
          gold.insert(p.end());
        }
        for (const AnswerPath &p : all) {
          if (std::ranges::equal(p.relations(), first.relations())) {
            reachable.insert(p.end());
          }
        }
        CHECK(gold == reachable);
      }
    }
    CHECK(two_hop > 0);
    std::vector<EntityId> shared;
    std::ranges::set_intersection(train_subjects, held_subjects,
                                  std::back_inserter(shared));
    CHECK(shared.empty());

    std::map<std::string, size_t> clusters;
    for (const auto &p : w.paraphrases) ++clusters[p.cluster];
    CHECK(clusters.size() == w.train.size());
    for (const auto &[id, n] : clusters) CHECK(n >= 2);
  }
}

TEST_CASE("toy world rejects impossible parameters") {
  ToyWorldConfig c = SmallWorld(1);
  c.density = 0;
  CHECK_THROWS_AS(MakeToyWorld(c), ConfigError);
  c = SmallWorld(1);
  c.entities = 1;
  CHECK_THROWS_AS(MakeToyWorld(c), ConfigError);
  c = SmallWorld(1);
  c.templates.one_hop.resize(1);
  CHECK_THROWS_AS(MakeToyWorld(c), ConfigError);
}

TEST_CASE("training data follows the records") {
  ToyWorld w = MakeToyWorld(SmallWorld(2));
  auto vocab = CollectVocabulary(w.graph, w.train, w.paraphrases);
  CHECK(std::set<std::string>(vocab.begin(), vocab.end()).size() ==
        vocab.size());
  Dictionary d = Dictionary::Build(w.graph, vocab);
  TrainingData data =
      MakeTrainingData(w.graph, d, w.train, w.paraphrases, true);
  CHECK(data.qa.size() == w.train.size());
  CHECK(data.paraphrases.size() == w.paraphrases.size());
  CHECK(data.names.size() == w.graph.name_entries().size());
  for (size_t i = 0; i < data.qa.size(); ++i) {
    CHECK(data.qa[i].entity == w.train[i].entity);
    CHECK(data.qa[i].question ==
          FeaturizeQuestion(d, Tokenize(w.train[i].question)));
  }
  const QaRecord &r = w.train.front();
  std::vector<std::string> gold = GoldEntities(w.graph, r);
  CHECK(gold.size() == r.answers.size());
  CHECK(gold[0] == w.graph.entity_name(r.answers[0].end()));
}

}  // namespace
}  // namespace kbqa
