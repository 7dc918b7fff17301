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

#ifndef KBQA_FEATURES_H_
#define KBQA_FEATURES_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kbqa/dictionary.h"
#include "kbqa/kb_store.h"

namespace kbqa {

// Count-valued sparse vector over dictionary indexes. Entries are sorted by
// strictly increasing index and every count is positive. Counts are real so
// that averaged answer features fit the same type.
class SparseVector {
 public:
  using Entry = std::pair<FeatureIndex, double>;

  SparseVector() = default;

  // Sums counts of repeated indexes and drops non-positive totals.
  static SparseVector FromEntries(std::vector<Entry> entries);
  static SparseVector OneHot(FeatureIndex index, double count = 1.0);

  const std::vector<Entry> &entries() const { return entries_; }
  size_t nonzeros() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // Count at index, 0 if absent.
  double at(FeatureIndex index) const;

  SparseVector Scaled(double factor) const;

  bool operator==(const SparseVector &) const = default;

 private:
  std::vector<Entry> entries_;
};

enum class Representation { kEntity, kPath, kSubgraph };

const char *RepresentationName(Representation rep);
Representation ParseRepresentation(const std::string &name);

// Default cap on neighbors included in a subgraph representation.
inline constexpr size_t kDefaultSubgraphCap = 100;

// Bag of known words. Unknown words are dropped.
SparseVector FeaturizeQuestion(const Dictionary &dict,
                               const std::vector<std::string> &words);

// 1-of-N_S coding of the answer entity (path role).
SparseVector FeaturizeAnswerEntity(const Dictionary &dict, EntityId answer);

// Start entity, end entity and each relation, all in path role. The
// intermediate entity of a 2-hop path is not encoded.
SparseVector FeaturizeAnswerPath(const Dictionary &dict,
                                 const AnswerPath &path);

// Path features plus one subgraph-role entry for every distinct neighbor
// entity and every distinct neighbor relation type of the answer. Only the
// first `cap` neighbors (in the given sorted order) are used.
SparseVector FeaturizeAnswerSubgraph(const Dictionary &dict,
                                     const AnswerPath &path,
                                     std::span<const Edge> neighbors,
                                     size_t cap = kDefaultSubgraphCap);

// Entrywise mean. Throws Error on an empty list.
SparseVector AverageFeatures(std::span<const SparseVector> vectors);

// Featurizes answers under a fixed representation, caching each entity's
// neighborhood. Immutable after construction; safe to share across threads.
class AnswerFeaturizer {
 public:
  AnswerFeaturizer(const KnowledgeGraph &graph, const Dictionary &dict,
                   Representation rep, size_t cap = kDefaultSubgraphCap);

  Representation representation() const { return rep_; }
  SparseVector Featurize(const AnswerPath &path) const;
  // Average of the features of several answers (multi-answer predictions).
  SparseVector FeaturizeAll(std::span<const AnswerPath> paths) const;

  // True when the two answers get identical features under this
  // representation.
  bool Equivalent(const AnswerPath &a, const AnswerPath &b) const;

 private:
  const KnowledgeGraph *graph_;
  const Dictionary *dict_;
  Representation rep_;
  size_t cap_;
  std::vector<std::vector<Edge>> neighbors_;
};

}  // namespace kbqa

#endif  // KBQA_FEATURES_H_
