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

#ifndef KBQA_INFERENCE_H_
#define KBQA_INFERENCE_H_

#include <string>
#include <vector>

#include "kbqa/dictionary.h"
#include "kbqa/features.h"
#include "kbqa/kb_store.h"
#include "kbqa/model.h"

namespace kbqa {

enum class Strategy { kC1, kC2, kAll2 };

const char *StrategyName(Strategy strategy);
Strategy ParseStrategy(const std::string &name);

inline constexpr size_t kDefaultTopRelations = 10;
inline constexpr double kDefaultOneHopWeight = 1.5;

struct CandidateEntry {
  AnswerPath path;
  // Multiplies the candidate's score.
  double weight = 1.0;
};

struct CandidateSet {
  Strategy strategy = Strategy::kC1;
  std::vector<CandidateEntry> entries;
};

// Every 1-hop path from e, weight 1.
CandidateSet CandidatesC1(const KnowledgeGraph &graph, EntityId e);

// Every 1- and 2-hop path from e, weight 1.
CandidateSet CandidatesAll2(const KnowledgeGraph &graph, EntityId e);

// Relation types ordered by the score of the question against each
// relation's path-role embedding, descending, ties by id; at most top_n.
std::vector<RelationId> RankRelationTypes(const EmbeddingMatrix &w,
                                          const Dictionary &dict,
                                          const SparseVector &question,
                                          size_t top_n = kDefaultTopRelations);

// 1-hop paths weighted by one_hop_weight plus the 2-hop paths in which one
// of the top_n ranked relation types appears, weight 1.
CandidateSet CandidatesC2(const KnowledgeGraph &graph, EntityId e,
                          const EmbeddingMatrix &w, const Dictionary &dict,
                          const SparseVector &question,
                          size_t top_n = kDefaultTopRelations,
                          double one_hop_weight = kDefaultOneHopWeight);

// The question entity and relation sequence shared by the paths of a
// grouped prediction.
struct PathSignature {
  EntityId start;
  std::vector<RelationId> relations;

  auto operator<=>(const PathSignature &) const = default;
};

struct Prediction {
  bool answered = false;
  PathSignature signature;
  // Ordered by individual candidate score, best first.
  std::vector<EntityId> entities;
  double score = 0.0;
};

struct InferenceOptions {
  Strategy strategy = Strategy::kC2;
  Representation representation = Representation::kSubgraph;
  bool group = true;
  size_t top_relations = kDefaultTopRelations;
  double one_hop_weight = kDefaultOneHopWeight;
  size_t subgraph_cap = kDefaultSubgraphCap;
};

// Answers questions with a trained model. Read-only; one instance may serve
// many threads.
class Predictor {
 public:
  Predictor(const EmbeddingMatrix &w, const Dictionary &dict,
            const KnowledgeGraph &graph, InferenceOptions options = {});

  const InferenceOptions &options() const { return options_; }

  // Resolves the question entity by string matching, then predicts. An
  // unresolvable question or an empty candidate set yields answered=false.
  Prediction Predict(const std::vector<std::string> &words) const;
  Prediction PredictForEntity(const SparseVector &question,
                              EntityId entity) const;

  CandidateSet Candidates(const SparseVector &question, EntityId entity) const;

  // "start:rel1|rel2" using graph names.
  std::string FormatSignature(const PathSignature &signature) const;

 private:
  const EmbeddingMatrix *w_;
  const Dictionary *dict_;
  const KnowledgeGraph *graph_;
  InferenceOptions options_;
  AnswerFeaturizer featurizer_;
};

}  // namespace kbqa

#endif  // KBQA_INFERENCE_H_
