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

#include "kbqa/kb_store.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "kbqa/error.h"
#include "kbqa/text.h"

namespace kbqa {

AnswerPath AnswerPath::OneHop(EntityId start, RelationId relation,
                              EntityId end) {
  AnswerPath p;
  p.start_ = start;
  p.end_ = end;
  p.relations_ = {relation, RelationId{}};
  p.hops_ = 1;
  return p;
}

AnswerPath AnswerPath::TwoHop(EntityId start, RelationId first,
                              EntityId middle, RelationId second,
                              EntityId end) {
  AnswerPath p;
  p.start_ = start;
  p.middle_ = middle;
  p.end_ = end;
  p.relations_ = {first, second};
  p.hops_ = 2;
  return p;
}

std::optional<EntityId> AnswerPath::intermediate() const {
  if (hops_ == 2) return middle_;
  return std::nullopt;
}

AnswerPath AnswerPath::WithEnd(EntityId end) const {
  AnswerPath p = *this;
  p.end_ = end;
  return p;
}

bool AnswerPath::operator==(const AnswerPath &other) const {
  return (*this <=> other) == std::strong_ordering::equal;
}

std::strong_ordering AnswerPath::operator<=>(const AnswerPath &other) const {
  if (auto c = start_ <=> other.start_; c != 0) return c;
  if (auto c = hops_ <=> other.hops_; c != 0) return c;
  if (auto c = relations_[0] <=> other.relations_[0]; c != 0) return c;
  if (hops_ == 2) {
    if (auto c = middle_ <=> other.middle_; c != 0) return c;
    if (auto c = relations_[1] <=> other.relations_[1]; c != 0) return c;
  }
  return end_ <=> other.end_;
}

// GraphBuilder

EntityId GraphBuilder::AddEntity(std::string_view name) {
  auto it = entity_lookup_.find(std::string(name));
  if (it != entity_lookup_.end()) return it->second;
  EntityId id{static_cast<uint32_t>(entities_.size())};
  entities_.emplace_back(name);
  names_.emplace_back();
  entity_lookup_.emplace(std::string(name), id);
  return id;
}

RelationId GraphBuilder::AddRelation(std::string_view name) {
  auto it = relation_lookup_.find(std::string(name));
  if (it != relation_lookup_.end()) return it->second;
  if (options_.inverse_relations &&
      name.starts_with(KnowledgeGraph::kInversePrefix)) {
    throw Error("relation name '" + std::string(name) +
                "' collides with the inverse relation prefix");
  }
  RelationId id{static_cast<uint32_t>(relations_.size())};
  relations_.emplace_back(name);
  relation_lookup_.emplace(std::string(name), id);
  return id;
}

void GraphBuilder::AddTriple(std::string_view subject,
                             std::string_view relation,
                             std::string_view object) {
  EntityId s = AddEntity(subject);
  RelationId r = AddRelation(relation);
  EntityId o = AddEntity(object);
  triples_.push_back({s, r, o});
}

void GraphBuilder::AddName(std::string_view entity, std::string_view name) {
  EntityId e = AddEntity(entity);
  auto &list = names_[e.value];
  if (std::find(list.begin(), list.end(), name) == list.end()) {
    list.emplace_back(name);
  }
}

KnowledgeGraph GraphBuilder::Build() && {
  KnowledgeGraph g;
  g.options_ = options_;
  g.entity_names_ = std::move(entities_);
  g.entity_lookup_ = std::move(entity_lookup_);
  g.relation_names_ = std::move(relations_);
  g.relation_lookup_ = std::move(relation_lookup_);
  g.base_relation_count_ = g.relation_names_.size();
  g.names_ = std::move(names_);

  if (options_.inverse_relations) {
    for (size_t r = 0; r < g.base_relation_count_; ++r) {
      std::string inv =
          std::string(KnowledgeGraph::kInversePrefix) + g.relation_names_[r];
      RelationId id{static_cast<uint32_t>(g.relation_names_.size())};
      g.relation_lookup_.emplace(inv, id);
      g.relation_names_.push_back(std::move(inv));
    }
  }

  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()),
                 triples_.end());
  g.triples_ = std::move(triples_);

  const size_t n = g.entity_names_.size();
  g.out_index_.assign(n, {});
  g.in_index_.assign(n, {});
  g.popularity_.assign(n, 0);
  for (const Triple &t : g.triples_) {
    g.out_index_[t.subject.value].push_back({t.relation, t.object});
    g.in_index_[t.object.value].push_back({t.relation, t.subject});
    g.popularity_[t.subject.value]++;
    if (t.object != t.subject) g.popularity_[t.object.value]++;
  }
  for (auto &edges : g.out_index_) std::sort(edges.begin(), edges.end());
  for (auto &edges : g.in_index_) std::sort(edges.begin(), edges.end());

  if (options_.inverse_relations) {
    g.traversal_index_.assign(n, {});
    for (size_t e = 0; e < n; ++e) {
      auto &edges = g.traversal_index_[e];
      edges = g.out_index_[e];
      for (const Edge &in : g.in_index_[e]) {
        edges.push_back({g.Inverse(in.relation), in.entity});
      }
      std::sort(edges.begin(), edges.end());
    }
  } else {
    g.traversal_index_ = g.out_index_;
  }

  for (size_t e = 0; e < n; ++e) {
    EntityId id{static_cast<uint32_t>(e)};
    std::vector<std::vector<std::string>> seen;
    auto add = [&](std::vector<std::string> tokens) {
      if (tokens.empty()) return;
      if (std::find(seen.begin(), seen.end(), tokens) != seen.end()) return;
      seen.push_back(tokens);
      g.name_entries_.push_back({std::move(tokens), id});
    };
    add(Tokenize(g.entity_names_[e]));
    for (const auto &name : g.names_[e]) add(Tokenize(name));
  }
  for (uint32_t i = 0; i < g.name_entries_.size(); ++i) {
    g.name_heads_[g.name_entries_[i].tokens.front()].push_back(i);
  }
  return g;
}

// KnowledgeGraph

KnowledgeGraph KnowledgeGraph::Parse(std::istream &input,
                                     GraphOptions options) {
  GraphBuilder builder(options);
  std::string line;
  size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = SplitFields(line, '\t');
    if (line.front() == '#') {
      if (fields[0] != "#name") continue;
      if (fields.size() != 3 || fields[1].empty() || fields[2].empty()) {
        throw ParseError(line_no,
                         "expected '#name<TAB>entity<TAB>string'");
      }
      builder.AddName(fields[1], fields[2]);
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    for (auto f : fields) {
      if (f.empty()) throw ParseError(line_no, "empty field");
    }
    try {
      builder.AddTriple(fields[0], fields[1], fields[2]);
    } catch (const ParseError &) {
      throw;
    } catch (const Error &e) {
      throw ParseError(line_no, e.what());
    }
  }
  return std::move(builder).Build();
}

KnowledgeGraph KnowledgeGraph::ParseString(std::string_view text,
                                           GraphOptions options) {
  std::istringstream in{std::string(text)};
  return Parse(in, options);
}

KnowledgeGraph KnowledgeGraph::LoadFile(const std::string &path,
                                        GraphOptions options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open triple file " + path);
  return Parse(in, options);
}

void KnowledgeGraph::Write(std::ostream &output) const {
  // Entities that occur in no triple and have no name are lost on reload;
  // give them a name line so the entity table survives a round trip.
  for (size_t e = 0; e < entity_names_.size(); ++e) {
    for (const auto &name : names_[e]) {
      output << "#name\t" << entity_names_[e] << '\t' << name << '\n';
    }
    if (names_[e].empty() && popularity_[e] == 0) {
      output << "#name\t" << entity_names_[e] << '\t' << entity_names_[e]
             << '\n';
    }
  }
  for (const Triple &t : triples_) {
    output << entity_names_[t.subject.value] << '\t'
           << relation_names_[t.relation.value] << '\t'
           << entity_names_[t.object.value] << '\n';
  }
}

const std::string &KnowledgeGraph::entity_name(EntityId e) const {
  CheckEntity(e);
  return entity_names_[e.value];
}

const std::string &KnowledgeGraph::relation_name(RelationId r) const {
  CheckRelation(r);
  return relation_names_[r.value];
}

std::optional<EntityId> KnowledgeGraph::FindEntity(
    std::string_view name) const {
  auto it = entity_lookup_.find(std::string(name));
  if (it == entity_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::FindRelation(
    std::string_view name) const {
  auto it = relation_lookup_.find(std::string(name));
  if (it == relation_lookup_.end()) return std::nullopt;
  return it->second;
}

EntityId KnowledgeGraph::GetEntity(std::string_view name) const {
  auto e = FindEntity(name);
  if (!e) throw NotFoundError("unknown entity '" + std::string(name) + "'");
  return *e;
}

RelationId KnowledgeGraph::GetRelation(std::string_view name) const {
  auto r = FindRelation(name);
  if (!r) throw NotFoundError("unknown relation '" + std::string(name) + "'");
  return *r;
}

bool KnowledgeGraph::IsInverse(RelationId r) const {
  return r.value >= base_relation_count_;
}

RelationId KnowledgeGraph::Inverse(RelationId r) const {
  CheckRelation(r);
  if (!options_.inverse_relations) {
    throw Error("inverse relations are not enabled for this graph");
  }
  const auto base = static_cast<uint32_t>(base_relation_count_);
  return RelationId{r.value < base ? r.value + base : r.value - base};
}

std::span<const Edge> KnowledgeGraph::OutEdges(EntityId e) const {
  CheckEntity(e);
  return out_index_[e.value];
}

std::span<const Edge> KnowledgeGraph::InEdges(EntityId e) const {
  CheckEntity(e);
  return in_index_[e.value];
}

std::span<const Edge> KnowledgeGraph::TraversableEdges(EntityId e) const {
  CheckEntity(e);
  return traversal_index_[e.value];
}

bool KnowledgeGraph::HasEdge(EntityId from, RelationId relation,
                             EntityId to) const {
  if (from.value >= entity_count() || to.value >= entity_count()) {
    return false;
  }
  const auto &edges = traversal_index_[from.value];
  return std::binary_search(edges.begin(), edges.end(), Edge{relation, to});
}

const std::vector<std::string> &KnowledgeGraph::names(EntityId e) const {
  CheckEntity(e);
  return names_[e.value];
}

uint32_t KnowledgeGraph::popularity(EntityId e) const {
  CheckEntity(e);
  return popularity_[e.value];
}

std::span<const uint32_t> KnowledgeGraph::NamesStartingWith(
    const std::string &token) const {
  auto it = name_heads_.find(token);
  if (it == name_heads_.end()) return {};
  return it->second;
}

void KnowledgeGraph::CheckEntity(EntityId e) const {
  if (e.value >= entity_names_.size()) {
    throw NotFoundError("unknown entity id " + std::to_string(e.value));
  }
}

void KnowledgeGraph::CheckRelation(RelationId r) const {
  if (r.value >= relation_names_.size()) {
    throw NotFoundError("unknown relation id " + std::to_string(r.value));
  }
}

// Traversal

std::vector<AnswerPath> OneHopPaths(const KnowledgeGraph &graph, EntityId e) {
  std::vector<AnswerPath> paths;
  for (const Edge &edge : graph.TraversableEdges(e)) {
    paths.push_back(AnswerPath::OneHop(e, edge.relation, edge.entity));
  }
  return paths;
}

std::vector<AnswerPath> TwoHopPaths(const KnowledgeGraph &graph, EntityId e,
                                    const RelationSet *allowed) {
  if (allowed != nullptr) {
    for (RelationId r : *allowed) graph.CheckRelation(r);
  }
  std::vector<AnswerPath> paths;
  for (const Edge &first : graph.TraversableEdges(e)) {
    const bool first_ok =
        allowed == nullptr || allowed->contains(first.relation);
    for (const Edge &second : graph.TraversableEdges(first.entity)) {
      if (!first_ok && !allowed->contains(second.relation)) continue;
      paths.push_back(AnswerPath::TwoHop(e, first.relation, first.entity,
                                         second.relation, second.entity));
    }
  }
  return paths;
}

std::vector<Edge> SubgraphNeighbors(const KnowledgeGraph &graph, EntityId e) {
  auto out = graph.OutEdges(e);
  auto in = graph.InEdges(e);
  std::vector<Edge> neighbors;
  neighbors.reserve(out.size() + in.size());
  std::set_union(out.begin(), out.end(), in.begin(), in.end(),
                 std::back_inserter(neighbors));
  neighbors.erase(std::unique(neighbors.begin(), neighbors.end()),
                  neighbors.end());
  return neighbors;
}

std::optional<EntityId> ResolveEntity(const KnowledgeGraph &graph,
                                      const std::vector<std::string> &words) {
  std::optional<EntityId> best;
  size_t best_length = 0;
  uint32_t best_popularity = 0;
  const auto &entries = graph.name_entries();
  for (size_t i = 0; i < words.size(); ++i) {
    for (uint32_t idx : graph.NamesStartingWith(words[i])) {
      const auto &entry = entries[idx];
      const size_t len = entry.tokens.size();
      if (i + len > words.size()) continue;
      if (!std::equal(entry.tokens.begin(), entry.tokens.end(),
                      words.begin() + i)) {
        continue;
      }
      const uint32_t pop = graph.popularity(entry.entity);
      bool better = !best || len > best_length ||
                    (len == best_length && pop > best_popularity) ||
                    (len == best_length && pop == best_popularity &&
                     entry.entity < *best);
      if (better) {
        best = entry.entity;
        best_length = len;
        best_popularity = pop;
      }
    }
  }
  return best;
}

}  // namespace kbqa
