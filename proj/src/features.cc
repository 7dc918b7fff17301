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

#include "kbqa/features.h"

#include <algorithm>
#include <map>

#include "kbqa/error.h"

namespace kbqa {

SparseVector SparseVector::FromEntries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry &a, const Entry &b) { return a.first < b.first; });
  SparseVector v;
  for (const auto &[index, count] : entries) {
    if (!v.entries_.empty() && v.entries_.back().first == index) {
      v.entries_.back().second += count;
    } else {
      v.entries_.emplace_back(index, count);
    }
  }
  std::erase_if(v.entries_, [](const Entry &e) { return !(e.second > 0.0); });
  return v;
}

SparseVector SparseVector::OneHot(FeatureIndex index, double count) {
  return FromEntries({{index, count}});
}

double SparseVector::at(FeatureIndex index) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), index,
      [](const Entry &e, FeatureIndex i) { return e.first < i; });
  if (it == entries_.end() || it->first != index) return 0.0;
  return it->second;
}

SparseVector SparseVector::Scaled(double factor) const {
  std::vector<Entry> scaled = entries_;
  for (auto &e : scaled) e.second *= factor;
  return FromEntries(std::move(scaled));
}

const char *RepresentationName(Representation rep) {
  switch (rep) {
    case Representation::kEntity:
      return "entity";
    case Representation::kPath:
      return "path";
    case Representation::kSubgraph:
      return "subgraph";
  }
  return "?";
}

Representation ParseRepresentation(const std::string &name) {
  if (name == "entity") return Representation::kEntity;
  if (name == "path") return Representation::kPath;
  if (name == "subgraph") return Representation::kSubgraph;
  throw ConfigError("unknown representation '" + name + "'");
}

SparseVector FeaturizeQuestion(const Dictionary &dict,
                               const std::vector<std::string> &words) {
  std::vector<SparseVector::Entry> entries;
  for (const auto &w : words) {
    if (auto i = dict.WordIndex(w)) entries.emplace_back(*i, 1.0);
  }
  return SparseVector::FromEntries(std::move(entries));
}

SparseVector FeaturizeAnswerEntity(const Dictionary &dict, EntityId answer) {
  return SparseVector::OneHot(dict.EntityIndex(answer, Role::kPath));
}

namespace {

void AppendPathEntries(const Dictionary &dict, const AnswerPath &path,
                       std::vector<SparseVector::Entry> &entries) {
  entries.emplace_back(dict.EntityIndex(path.start(), Role::kPath), 1.0);
  for (RelationId r : path.relations()) {
    entries.emplace_back(dict.RelationIndex(r, Role::kPath), 1.0);
  }
  entries.emplace_back(dict.EntityIndex(path.end(), Role::kPath), 1.0);
}

}  // namespace

SparseVector FeaturizeAnswerPath(const Dictionary &dict,
                                 const AnswerPath &path) {
  std::vector<SparseVector::Entry> entries;
  AppendPathEntries(dict, path, entries);
  return SparseVector::FromEntries(std::move(entries));
}

SparseVector FeaturizeAnswerSubgraph(const Dictionary &dict,
                                     const AnswerPath &path,
                                     std::span<const Edge> neighbors,
                                     size_t cap) {
  std::vector<SparseVector::Entry> entries;
  AppendPathEntries(dict, path, entries);
  // Subgraph symbols are indicator features: an entity reached through two
  // relations, or a relation shared by many neighbors, still counts once.
  std::vector<FeatureIndex> subgraph;
  const size_t used = std::min(cap, neighbors.size());
  for (size_t i = 0; i < used; ++i) {
    subgraph.push_back(dict.EntityIndex(neighbors[i].entity, Role::kSubgraph));
    subgraph.push_back(
        dict.RelationIndex(neighbors[i].relation, Role::kSubgraph));
  }
  std::sort(subgraph.begin(), subgraph.end());
  subgraph.erase(std::unique(subgraph.begin(), subgraph.end()),
                 subgraph.end());
  for (FeatureIndex i : subgraph) entries.emplace_back(i, 1.0);
  return SparseVector::FromEntries(std::move(entries));
}

SparseVector AverageFeatures(std::span<const SparseVector> vectors) {
  if (vectors.empty()) throw Error("cannot average an empty feature list");
  if (vectors.size() == 1) return vectors.front();
  std::map<FeatureIndex, double> sums;
  for (const auto &v : vectors) {
    for (const auto &[index, count] : v.entries()) sums[index] += count;
  }
  const double inv = 1.0 / static_cast<double>(vectors.size());
  std::vector<SparseVector::Entry> entries;
  entries.reserve(sums.size());
  for (const auto &[index, sum] : sums) entries.emplace_back(index, sum * inv);
  return SparseVector::FromEntries(std::move(entries));
}

AnswerFeaturizer::AnswerFeaturizer(const KnowledgeGraph &graph,
                                   const Dictionary &dict, Representation rep,
                                   size_t cap)
    : graph_(&graph), dict_(&dict), rep_(rep), cap_(cap) {
  dict.CheckCompatible(graph);
  if (rep_ == Representation::kSubgraph) {
    neighbors_.resize(graph.entity_count());
    for (uint32_t e = 0; e < graph.entity_count(); ++e) {
      neighbors_[e] = SubgraphNeighbors(graph, EntityId{e});
    }
  }
}

SparseVector AnswerFeaturizer::Featurize(const AnswerPath &path) const {
  switch (rep_) {
    case Representation::kEntity:
      return FeaturizeAnswerEntity(*dict_, path.end());
    case Representation::kPath:
      return FeaturizeAnswerPath(*dict_, path);
    case Representation::kSubgraph:
      graph_->CheckEntity(path.end());
      return FeaturizeAnswerSubgraph(*dict_, path, neighbors_[path.end().value],
                                     cap_);
  }
  return {};
}

SparseVector AnswerFeaturizer::FeaturizeAll(
    std::span<const AnswerPath> paths) const {
  std::vector<SparseVector> features;
  features.reserve(paths.size());
  for (const auto &p : paths) features.push_back(Featurize(p));
  return AverageFeatures(features);
}

bool AnswerFeaturizer::Equivalent(const AnswerPath &a,
                                  const AnswerPath &b) const {
  if (a.end() != b.end()) return false;
  if (rep_ == Representation::kEntity) return true;
  if (a.start() != b.start()) return false;
  auto ra = a.relations();
  auto rb = b.relations();
  return std::equal(ra.begin(), ra.end(), rb.begin(), rb.end());
}

}  // namespace kbqa
