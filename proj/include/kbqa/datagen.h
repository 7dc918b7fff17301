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

#ifndef KBQA_DATAGEN_H_
#define KBQA_DATAGEN_H_

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kbqa/dictionary.h"
#include "kbqa/kb_store.h"
#include "kbqa/training.h"

namespace kbqa {

// A question pattern with named {slot} placeholders.
class QuestionTemplate {
 public:
  // Throws ConfigError unless every required slot occurs exactly once, each
  // optional slot at most once, and no other slot occurs.
  static QuestionTemplate Parse(const std::string &pattern,
                                const std::vector<std::string> &slots,
                                const std::vector<std::string> &optional = {});

  const std::string &pattern() const { return pattern_; }
  const std::vector<std::string> &slots() const { return slots_; }

  // Substitutes the slots and collapses runs of whitespace.
  std::string Fill(const std::map<std::string, std::string> &values) const;

 private:
  std::string pattern_;
  std::vector<std::string> slots_;
};

// Slots of the triple template.
inline const std::vector<std::string> kTripleSlots = {"predicate", "type2",
                                                      "subject"};
// Required slots of 1-hop and 2-hop toy-world templates. Both may also use
// {type}, the answer's type.
inline const std::vector<std::string> kOneHopSlots = {"predicate", "subject"};
inline const std::vector<std::string> kTwoHopSlots = {"predicate1",
                                                      "predicate2", "subject"};
inline const std::vector<std::string> kToyOptionalSlots = {"type"};

struct TemplateSet {
  QuestionTemplate triple;
  std::vector<QuestionTemplate> one_hop;
  std::vector<QuestionTemplate> two_hop;
};

TemplateSet DefaultTemplates();

// JSON object {"triple": str, "one_hop": [str...], "two_hop": [str...]};
// missing keys keep their defaults.
TemplateSet ParseTemplateSet(const std::string &json_text);
TemplateSet LoadTemplateSet(const std::string &path);

// "type1.type2.predicate" -> {"type2", "predicate"}, underscores turned into
// spaces. Names with fewer than three parts become the predicate with an
// empty type.
struct RelationWords {
  std::string type2;
  std::string predicate;
};
RelationWords SplitRelationName(const std::string &relation);

// A question with its resolved entity and gold answer paths.
struct QaRecord {
  std::string question;
  EntityId entity;
  std::vector<AnswerPath> answers;

  bool operator==(const QaRecord &) const = default;
};

// One question per triple from the triple template; gold is the triple's
// 1-hop path.
std::vector<QaRecord> TriplesToQuestions(const KnowledgeGraph &graph,
                                         const QuestionTemplate &tmpl);

// QA file: question<TAB>entity<TAB>path[;path...], path = rel1[|rel2]>answer.
void WriteQaDataset(std::ostream &output, const KnowledgeGraph &graph,
                    std::span<const QaRecord> records);

struct QaLoadResult {
  std::vector<QaRecord> records;
  size_t rejected = 0;
  std::vector<std::string> rejections;
};

// Throws ParseError on malformed lines. Lines naming an unknown entity or
// relation, or a path that does not exist in the graph, are skipped and
// counted. A 2-hop path's intermediate is the lowest-id entity connecting it.
QaLoadResult LoadQaDataset(std::istream &input, const KnowledgeGraph &graph);
QaLoadResult LoadQaFile(const std::string &path, const KnowledgeGraph &graph);

struct ParaphraseRecord {
  std::string cluster;
  std::string question;

  bool operator==(const ParaphraseRecord &) const = default;
};

// Paraphrase file: cluster_id<TAB>question.
void WriteParaphrases(std::ostream &output,
                      std::span<const ParaphraseRecord> records);
std::vector<ParaphraseRecord> LoadParaphrases(std::istream &input);
std::vector<ParaphraseRecord> LoadParaphraseFile(const std::string &path);

struct ToyWorldConfig {
  size_t entities = 200;
  size_t relations = 12;
  // Probability that an entity has edges for a relation its type admits.
  double density = 0.8;
  uint64_t seed = 1;
  size_t train = 2000;
  size_t valid = 0;
  size_t test = 200;
  // Target share of planted questions answered by a 2-hop path.
  double two_hop_fraction = 0.4;
  // Probability that a subject gets 2-3 objects for a relation instead of 1.
  double multi_answer_probability = 0.3;
  // 2-hop questions with more gold answers than this are not planted.
  size_t max_answers = 4;
  TemplateSet templates = DefaultTemplates();
};

struct ToyWorld {
  KnowledgeGraph graph;
  std::vector<QaRecord> train;
  std::vector<QaRecord> valid;
  std::vector<QaRecord> test;
  std::vector<ParaphraseRecord> paraphrases;
};

// Random typed graph with planted 1- and 2-hop questions whose gold answers
// are exactly the entities on one path signature. Each training question
// also yields a paraphrase cluster rendered with every template of its kind.
// Throws ConfigError if no question can be planted.
ToyWorld MakeToyWorld(const ToyWorldConfig &config);

// Tokens of all questions, paraphrases and entity names in first-seen order.
std::vector<std::string> CollectVocabulary(
    const KnowledgeGraph &graph, std::span<const QaRecord> qa,
    std::span<const ParaphraseRecord> paraphrases);

// Featurizes records for training. With `names`, every entity name becomes
// a name-mapping example.
TrainingData MakeTrainingData(const KnowledgeGraph &graph,
                              const Dictionary &dict,
                              std::span<const QaRecord> qa,
                              std::span<const ParaphraseRecord> paraphrases,
                              bool names);

// Gold answer entity names of a record.
std::vector<std::string> GoldEntities(const KnowledgeGraph &graph,
                                      const QaRecord &record);

}  // namespace kbqa

#endif  // KBQA_DATAGEN_H_
