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

#include "kbqa/datagen.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "kbqa/error.h"
#include "kbqa/features.h"
#include "kbqa/text.h"

namespace kbqa {

// QuestionTemplate

QuestionTemplate QuestionTemplate::Parse(
    const std::string &pattern, const std::vector<std::string> &slots,
    const std::vector<std::string> &optional) {
  std::map<std::string, int> seen;
  size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string::npos) {
    const size_t close = pattern.find('}', pos);
    if (close == std::string::npos) {
      throw ConfigError("unterminated slot in template '" + pattern + "'");
    }
    seen[pattern.substr(pos + 1, close - pos - 1)]++;
    pos = close + 1;
  }
  for (const auto &slot : slots) {
    if (seen[slot] != 1) {
      throw ConfigError("template '" + pattern + "' must contain {" + slot +
                        "} exactly once");
    }
  }
  for (const auto &slot : optional) {
    if (seen[slot] > 1) {
      throw ConfigError("template '" + pattern + "' repeats {" + slot + "}");
    }
  }
  QuestionTemplate t;
  t.slots_ = slots;
  t.slots_.insert(t.slots_.end(), optional.begin(), optional.end());
  for (const auto &[name, count] : seen) {
    if (count > 0 &&
        std::find(t.slots_.begin(), t.slots_.end(), name) == t.slots_.end()) {
      throw ConfigError("template '" + pattern + "' has unknown slot {" +
                        name + "}");
    }
  }
  t.pattern_ = pattern;
  return t;
}

std::string QuestionTemplate::Fill(
    const std::map<std::string, std::string> &values) const {
  std::string filled;
  size_t pos = 0;
  while (pos < pattern_.size()) {
    const size_t open = pattern_.find('{', pos);
    if (open == std::string::npos) {
      filled += pattern_.substr(pos);
      break;
    }
    filled += pattern_.substr(pos, open - pos);
    const size_t close = pattern_.find('}', open);
    const std::string slot = pattern_.substr(open + 1, close - open - 1);
    auto it = values.find(slot);
    if (it == values.end()) throw ConfigError("no value for slot {" + slot + "}");
    filled += it->second;
    pos = close + 1;
  }
  std::string collapsed;
  bool space = false;
  for (char c : filled) {
    if (c == ' ' || c == '\t') {
      space = !collapsed.empty();
    } else {
      if (space) collapsed.push_back(' ');
      space = false;
      collapsed.push_back(c);
    }
  }
  return collapsed;
}

TemplateSet DefaultTemplates() {
  TemplateSet set;
  set.triple = QuestionTemplate::Parse(
      "what is the {predicate} of the {type2} {subject} ?", kTripleSlots);
  for (const char *p : {"which {type} is the {predicate} of {subject} ?",
                        "what {type} is the {predicate} of {subject} ?",
                        "the {predicate} of {subject} is which {type} ?"}) {
    set.one_hop.push_back(QuestionTemplate::Parse(p, kOneHopSlots, kToyOptionalSlots));
  }
  for (const char *p :
       {"which {type} is the {predicate2} of the {predicate1} of {subject} ?",
        "what {type} is the {predicate2} of the {predicate1} of {subject} ?",
        "the {predicate2} of the {predicate1} of {subject} is which {type} ?"}) {
    set.two_hop.push_back(QuestionTemplate::Parse(p, kTwoHopSlots, kToyOptionalSlots));
  }
  return set;
}

TemplateSet ParseTemplateSet(const std::string &json_text) {
  TemplateSet set = DefaultTemplates();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("template config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("template config must be an object");
  try {
    if (doc.contains("triple")) {
      set.triple = QuestionTemplate::Parse(doc["triple"].get<std::string>(),
                                           kTripleSlots);
    }
    if (doc.contains("one_hop")) {
      set.one_hop.clear();
      for (const auto &p : doc["one_hop"]) {
        set.one_hop.push_back(
            QuestionTemplate::Parse(p.get<std::string>(), kOneHopSlots,
                                    kToyOptionalSlots));
      }
    }
    if (doc.contains("two_hop")) {
      set.two_hop.clear();
      for (const auto &p : doc["two_hop"]) {
        set.two_hop.push_back(
            QuestionTemplate::Parse(p.get<std::string>(), kTwoHopSlots,
                                    kToyOptionalSlots));
      }
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("template config: ") + e.what());
  }
  return set;
}

TemplateSet LoadTemplateSet(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open template config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseTemplateSet(buffer.str());
}

RelationWords SplitRelationName(const std::string &relation) {
  auto parts = SplitFields(relation, '.');
  RelationWords words;
  if (parts.size() >= 3) {
    words.type2 = std::string(parts[parts.size() - 2]);
    words.predicate = std::string(parts.back());
  } else {
    words.predicate = relation;
  }
  std::replace(words.type2.begin(), words.type2.end(), '_', ' ');
  std::replace(words.predicate.begin(), words.predicate.end(), '_', ' ');
  return words;
}

std::vector<QaRecord> TriplesToQuestions(const KnowledgeGraph &graph,
                                         const QuestionTemplate &tmpl) {
  std::vector<QaRecord> records;
  for (const Triple &t : graph.triples()) {
    const RelationWords words =
        SplitRelationName(graph.relation_name(t.relation));
    QaRecord r;
    r.question = tmpl.Fill({{"predicate", words.predicate},
                            {"type2", words.type2},
                            {"subject", graph.entity_name(t.subject)}});
    r.entity = t.subject;
    r.answers.push_back(AnswerPath::OneHop(t.subject, t.relation, t.object));
    records.push_back(std::move(r));
  }
  return records;
}

// QA dataset I/O

void WriteQaDataset(std::ostream &output, const KnowledgeGraph &graph,
                    std::span<const QaRecord> records) {
  for (const auto &r : records) {
    output << r.question << '\t' << graph.entity_name(r.entity) << '\t';
    for (size_t i = 0; i < r.answers.size(); ++i) {
      if (i > 0) output << ';';
      const auto rels = r.answers[i].relations();
      for (size_t j = 0; j < rels.size(); ++j) {
        if (j > 0) output << '|';
        output << graph.relation_name(rels[j]);
      }
      output << '>' << graph.entity_name(r.answers[i].end());
    }
    output << '\n';
  }
}

namespace {

std::optional<EntityId> FindIntermediate(const KnowledgeGraph &graph,
                                         EntityId start, RelationId first,
                                         RelationId second, EntityId end) {
  for (const Edge &e : graph.TraversableEdges(start)) {
    if (e.relation != first) continue;
    if (graph.HasEdge(e.entity, second, end)) return e.entity;
  }
  return std::nullopt;
}

}  // namespace

QaLoadResult LoadQaDataset(std::istream &input, const KnowledgeGraph &graph) {
  QaLoadResult result;
  std::string line;
  size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected question<TAB>entity<TAB>paths");
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError(line_no, "empty field");
    }
    auto reject = [&](const std::string &why) {
      ++result.rejected;
      result.rejections.push_back("line " + std::to_string(line_no) + ": " +
                                  why);
    };
    QaRecord record;
    record.question = std::string(fields[0]);
    auto entity = graph.FindEntity(fields[1]);
    if (!entity) {
      reject("unknown entity '" + std::string(fields[1]) + "'");
      continue;
    }
    record.entity = *entity;
    bool ok = true;
    for (auto path_text : SplitFields(fields[2], ';')) {
      const size_t arrow = path_text.rfind('>');
      if (arrow == std::string_view::npos || arrow == 0 ||
          arrow + 1 == path_text.size()) {
        throw ParseError(line_no, "path must look like rel1[|rel2]>answer");
      }
      auto rel_names = SplitFields(path_text.substr(0, arrow), '|');
      if (rel_names.size() > 2) {
        throw ParseError(line_no, "paths have at most two relations");
      }
      std::vector<RelationId> rels;
      for (auto name : rel_names) {
        if (name.empty()) throw ParseError(line_no, "empty relation name");
        auto r = graph.FindRelation(name);
        if (!r) {
          reject("unknown relation '" + std::string(name) + "'");
          ok = false;
          break;
        }
        rels.push_back(*r);
      }
      if (!ok) break;
      auto answer = graph.FindEntity(path_text.substr(arrow + 1));
      if (!answer) {
        reject("unknown entity '" + std::string(path_text.substr(arrow + 1)) +
               "'");
        ok = false;
        break;
      }
      if (rels.size() == 1) {
        if (!graph.HasEdge(*entity, rels[0], *answer)) {
          reject("path is not in the graph");
          ok = false;
          break;
        }
        record.answers.push_back(AnswerPath::OneHop(*entity, rels[0], *answer));
      } else {
        auto middle =
            FindIntermediate(graph, *entity, rels[0], rels[1], *answer);
        if (!middle) {
          reject("path is not in the graph");
          ok = false;
          break;
        }
        record.answers.push_back(
            AnswerPath::TwoHop(*entity, rels[0], *middle, rels[1], *answer));
      }
    }
    if (ok) result.records.push_back(std::move(record));
  }
  return result;
}

QaLoadResult LoadQaFile(const std::string &path, const KnowledgeGraph &graph) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open QA file " + path);
  return LoadQaDataset(in, graph);
}

void WriteParaphrases(std::ostream &output,
                      std::span<const ParaphraseRecord> records) {
  for (const auto &r : records) output << r.cluster << '\t' << r.question << '\n';
}

std::vector<ParaphraseRecord> LoadParaphrases(std::istream &input) {
  std::vector<ParaphraseRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(line_no, "expected cluster_id<TAB>question");
    }
    records.push_back({std::string(fields[0]), std::string(fields[1])});
  }
  return records;
}

std::vector<ParaphraseRecord> LoadParaphraseFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open paraphrase file " + path);
  return LoadParaphrases(in);
}

// Toy world

namespace {

constexpr const char *kTypeNames[] = {"person", "city",  "country", "film",
                                      "company", "language", "team", "book"};

constexpr const char *kPredicates[] = {
    "spouse",   "founder",   "capital",  "director", "author",    "currency",
    "mayor",    "leader",    "genre",    "producer", "member",    "owner",
    "anthem",   "sibling",   "employer", "religion", "sponsor",   "rival",
    "partner",  "landmark",  "coach",    "editor",   "publisher", "mascot",
    "composer", "architect", "governor", "ally",     "heir",      "patron",
    "mentor",   "successor"};

struct PlantedQuestion {
  EntityId subject;
  std::vector<RelationId> relations;
  std::vector<AnswerPath> answers;
};

std::string ToyEntityName(const std::string &type, size_t index) {
  std::string num = std::to_string(index);
  if (num.size() < 3) num.insert(0, 3 - num.size(), '0');
  return type + "_" + num;
}

}  // namespace

ToyWorld MakeToyWorld(const ToyWorldConfig &config) {
  constexpr size_t kMaxTypes = std::size(kTypeNames);
  constexpr size_t kMaxRelations = std::size(kPredicates) + 1;
  if (config.entities < 2 || config.relations < 2) {
    throw ConfigError("toy world needs at least 2 entities and 2 relations");
  }
  if (config.relations > kMaxRelations) {
    throw ConfigError("toy world supports at most " +
                      std::to_string(kMaxRelations) + " relations");
  }
  if (config.templates.one_hop.size() < 2 ||
      config.templates.two_hop.size() < 2) {
    throw ConfigError("paraphrase clusters need at least 2 templates per kind");
  }
  std::mt19937_64 rng(config.seed);

  const size_t type_count =
      std::clamp<size_t>(config.relations / 2, 2, kMaxTypes);
  if (config.entities < 2 * type_count) {
    throw ConfigError("toy world needs at least 2 entities per type");
  }

  GraphBuilder builder;
  // Type entities first, then typed regular entities.
  std::vector<EntityId> type_entity;
  for (size_t t = 0; t < type_count; ++t) {
    type_entity.push_back(builder.AddEntity(std::string("type_") + kTypeNames[t]));
  }
  std::vector<std::vector<std::string>> by_type(type_count);
  std::vector<std::pair<std::string, size_t>> regular;
  for (size_t i = 0; i < config.entities - type_count; ++i) {
    const size_t t = i % type_count;
    std::string name = ToyEntityName(kTypeNames[t], i);
    by_type[t].push_back(name);
    regular.emplace_back(name, t);
  }

  // The types split into two sides. A relation takes every type of one side
  // as subjects and a single type of the other side as objects, so a 2-hop
  // chain returns to the side it started from.
  struct ToyRelation {
    std::string name;
    std::string predicate;
    std::vector<size_t> domain;
    size_t range;
  };
  std::vector<ToyRelation> relations;
  const std::string is_a = "toy.common.is_a";
  std::vector<size_t> predicate_order(std::size(kPredicates));
  for (size_t i = 0; i < predicate_order.size(); ++i) predicate_order[i] = i;
  std::shuffle(predicate_order.begin(), predicate_order.end(), rng);
  std::vector<size_t> type_order(type_count);
  for (size_t t = 0; t < type_count; ++t) type_order[t] = t;
  std::shuffle(type_order.begin(), type_order.end(), rng);
  const size_t half = type_count / 2;
  std::vector<size_t> sides[2] = {
      {type_order.begin(), type_order.begin() + half},
      {type_order.begin() + half, type_order.end()}};
  for (auto &side : sides) std::sort(side.begin(), side.end());
  for (size_t r = 0; r + 1 < config.relations; ++r) {
    ToyRelation rel;
    rel.predicate = kPredicates[predicate_order[r]];
    const auto &from = sides[r % 2];
    const auto &to = sides[1 - r % 2];
    rel.domain = from;
    rel.range = to[std::uniform_int_distribution<size_t>(0, to.size() - 1)(rng)];
    rel.name = std::string("toy.") + kTypeNames[rel.domain.front()] + "." +
               rel.predicate;
    relations.push_back(std::move(rel));
  }

  builder.AddRelation(is_a);
  for (const auto &rel : relations) builder.AddRelation(rel.name);
  for (const auto &[name, t] : regular) builder.AddEntity(name);

  std::bernoulli_distribution has_edge(config.density);
  std::bernoulli_distribution multi(config.multi_answer_probability);
  for (const auto &rel : relations) {
    std::vector<std::string> subjects;
    for (size_t t : rel.domain) {
      subjects.insert(subjects.end(), by_type[t].begin(), by_type[t].end());
    }
    std::sort(subjects.begin(), subjects.end());
    for (const auto &subject : subjects) {
      if (!has_edge(rng)) continue;
      std::vector<std::string> pool;
      for (const auto &o : by_type[rel.range]) {
        if (o != subject) pool.push_back(o);
      }
      if (pool.empty()) continue;
      size_t fanout = 1;
      if (multi(rng)) fanout = std::uniform_int_distribution<size_t>(2, 3)(rng);
      fanout = std::min(fanout, pool.size());
      std::shuffle(pool.begin(), pool.end(), rng);
      for (size_t i = 0; i < fanout; ++i) {
        builder.AddTriple(subject, rel.name, pool[i]);
      }
    }
  }
  for (const auto &[name, t] : regular) {
    builder.AddTriple(name, is_a, std::string("type_") + kTypeNames[t]);
  }

  ToyWorld world;
  world.graph = std::move(builder).Build();
  const KnowledgeGraph &g = world.graph;
  const RelationId is_a_id = g.GetRelation(is_a);

  // Plant questions: every (subject, relation) and (subject, r1, r2) whose
  // answer set is small and excludes the subject.
  std::vector<PlantedQuestion> one_hop, two_hop;
  for (uint32_t s = static_cast<uint32_t>(type_count); s < g.entity_count();
       ++s) {
    const EntityId subject{s};
    std::map<RelationId, std::vector<AnswerPath>> by_relation;
    for (const auto &p : OneHopPaths(g, subject)) {
      if (p.relations()[0] == is_a_id) continue;
      by_relation[p.relations()[0]].push_back(p);
    }
    for (auto &[r, paths] : by_relation) {
      one_hop.push_back({subject, {r}, std::move(paths)});
    }
    std::map<std::pair<RelationId, RelationId>, std::map<EntityId, AnswerPath>>
        by_pair;
    for (const auto &p : TwoHopPaths(g, subject)) {
      auto rels = p.relations();
      if (rels[0] == is_a_id || rels[1] == is_a_id) continue;
      by_pair[{rels[0], rels[1]}].emplace(p.end(), p);  // keeps lowest middle
    }
    for (auto &[key, ends] : by_pair) {
      if (ends.contains(subject) || ends.size() > config.max_answers) continue;
      PlantedQuestion q{subject, {key.first, key.second}, {}};
      for (auto &[end, path] : ends) q.answers.push_back(path);
      two_hop.push_back(std::move(q));
    }
  }
  if (one_hop.empty() && two_hop.empty()) {
    throw ConfigError("toy world parameters yield no answerable question");
  }
  // Splits are disjoint by subject so held-out questions cannot be answered
  // by recalling other facts about the same subject.
  std::map<EntityId, std::pair<std::vector<PlantedQuestion>,
                               std::vector<PlantedQuestion>>>
      by_subject;
  for (auto &q : one_hop) by_subject[q.subject].first.push_back(std::move(q));
  for (auto &q : two_hop) by_subject[q.subject].second.push_back(std::move(q));
  std::vector<EntityId> subjects;
  for (auto &[s, lists] : by_subject) {
    std::shuffle(lists.first.begin(), lists.first.end(), rng);
    std::shuffle(lists.second.begin(), lists.second.end(), rng);
    subjects.push_back(s);
  }
  std::shuffle(subjects.begin(), subjects.end(), rng);

  // Takes whole subjects until the split is full, honoring the 2-hop share
  // where possible; a short kind is made up with the other.
  size_t next_subject = 0;
  auto draw_split = [&](size_t count) {
    std::vector<PlantedQuestion> split;
    size_t want_two = std::min<size_t>(
        count, static_cast<size_t>(std::llround(
                   config.two_hop_fraction * static_cast<double>(count))));
    size_t want_one = count - want_two;
    std::vector<PlantedQuestion> spare;
    while (want_one + want_two > 0 && next_subject < subjects.size()) {
      auto &[ones, twos] = by_subject[subjects[next_subject++]];
      for (auto &q : ones) {
        if (want_one > 0) {
          split.push_back(std::move(q));
          --want_one;
        } else {
          spare.push_back(std::move(q));
        }
      }
      for (auto &q : twos) {
        if (want_two > 0) {
          split.push_back(std::move(q));
          --want_two;
        } else {
          spare.push_back(std::move(q));
        }
      }
    }
    for (size_t i = 0; i < spare.size() && split.size() < count; ++i) {
      split.push_back(std::move(spare[i]));
    }
    std::shuffle(split.begin(), split.end(), rng);
    return split;
  };
  std::vector<PlantedQuestion> test_questions = draw_split(config.test);
  std::vector<PlantedQuestion> valid_questions = draw_split(config.valid);
  std::vector<PlantedQuestion> train_questions = draw_split(config.train);
  if (train_questions.empty() && config.train > 0) {
    throw ConfigError("toy world has no subjects left for training questions");
  }

  auto render = [&](const PlantedQuestion &q, const QuestionTemplate &t) {
    const auto &rel_of = [&](RelationId r) -> const ToyRelation & {
      return relations[r.value - 1];
    };
    const ToyRelation &last = rel_of(q.relations.back());
    std::map<std::string, std::string> values = {
        {"subject", g.entity_name(q.subject)},
        {"type", kTypeNames[last.range]}};
    if (q.relations.size() == 1) {
      values["predicate"] = last.predicate;
    } else {
      values["predicate1"] = rel_of(q.relations[0]).predicate;
      values["predicate2"] = last.predicate;
    }
    return t.Fill(values);
  };
  auto templates_for = [&](const PlantedQuestion &q)
      -> const std::vector<QuestionTemplate> & {
    return q.relations.size() == 1 ? config.templates.one_hop
                                   : config.templates.two_hop;
  };

  auto record = [&](const PlantedQuestion &q) {
    const auto &templates = templates_for(q);
    std::uniform_int_distribution<size_t> pick(0, templates.size() - 1);
    return QaRecord{render(q, templates[pick(rng)]), q.subject, q.answers};
  };
  for (const auto &q : test_questions) world.test.push_back(record(q));
  for (const auto &q : valid_questions) world.valid.push_back(record(q));
  size_t cluster = 0;
  for (const auto &q : train_questions) {
    world.train.push_back(record(q));
    const std::string id = "c" + std::to_string(cluster++);
    for (const auto &t : templates_for(q)) {
      world.paraphrases.push_back({id, render(q, t)});
    }
  }
  return world;
}

std::vector<std::string> CollectVocabulary(
    const KnowledgeGraph &graph, std::span<const QaRecord> qa,
    std::span<const ParaphraseRecord> paraphrases) {
  std::vector<std::string> words;
  std::set<std::string> seen;
  auto add = [&](std::string_view text) {
    for (auto &w : Tokenize(text)) {
      if (seen.insert(w).second) words.push_back(std::move(w));
    }
  };
  for (const auto &r : qa) add(r.question);
  for (const auto &p : paraphrases) add(p.question);
  for (const auto &entry : graph.name_entries()) {
    for (const auto &w : entry.tokens) {
      if (seen.insert(w).second) words.push_back(w);
    }
  }
  return words;
}

TrainingData MakeTrainingData(const KnowledgeGraph &graph,
                              const Dictionary &dict,
                              std::span<const QaRecord> qa,
                              std::span<const ParaphraseRecord> paraphrases,
                              bool names) {
  TrainingData data;
  for (const auto &r : qa) {
    data.qa.push_back(
        {FeaturizeQuestion(dict, Tokenize(r.question)), r.answers, r.entity});
  }
  std::unordered_map<std::string, uint32_t> cluster_ids;
  for (const auto &p : paraphrases) {
    auto [it, inserted] = cluster_ids.emplace(
        p.cluster, static_cast<uint32_t>(cluster_ids.size()));
    SparseVector q = FeaturizeQuestion(dict, Tokenize(p.question));
    if (q.empty()) continue;
    data.paraphrases.push_back({it->second, std::move(q)});
  }
  if (names) {
    for (const auto &entry : graph.name_entries()) {
      SparseVector name = FeaturizeQuestion(dict, entry.tokens);
      if (name.empty()) continue;
      data.names.push_back({entry.entity, std::move(name)});
    }
  }
  return data;
}

std::vector<std::string> GoldEntities(const KnowledgeGraph &graph,
                                      const QaRecord &record) {
  std::vector<std::string> gold;
  for (const auto &p : record.answers) {
    const std::string &name = graph.entity_name(p.end());
    if (std::find(gold.begin(), gold.end(), name) == gold.end()) {
      gold.push_back(name);
    }
  }
  return gold;
}

}  // namespace kbqa
