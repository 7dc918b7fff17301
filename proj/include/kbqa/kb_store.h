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

#ifndef KBQA_KB_STORE_H_
#define KBQA_KB_STORE_H_

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kbqa {

// Dense integer id tagged by the kind of symbol it names.
template <typename Tag>
struct Id {
  uint32_t value = 0;

  constexpr auto operator<=>(const Id &) const = default;
};

using EntityId = Id<struct EntityTag>;
using RelationId = Id<struct RelationTag>;

struct Triple {
  EntityId subject;
  RelationId relation;
  EntityId object;

  auto operator<=>(const Triple &) const = default;
};

// One adjacency entry: the relation of an incident edge and the entity at
// its other end.
struct Edge {
  RelationId relation;
  EntityId entity;

  auto operator<=>(const Edge &) const = default;
};

// A 1- or 2-hop path from a question entity to a candidate answer. The
// intermediate entity is present iff the path has two relations.
class AnswerPath {
 public:
  static AnswerPath OneHop(EntityId start, RelationId relation, EntityId end);
  static AnswerPath TwoHop(EntityId start, RelationId first, EntityId middle,
                           RelationId second, EntityId end);

  EntityId start() const { return start_; }
  EntityId end() const { return end_; }
  int hops() const { return hops_; }
  std::optional<EntityId> intermediate() const;
  std::span<const RelationId> relations() const {
    return {relations_.data(), static_cast<size_t>(hops_)};
  }

  // Same start and relations, different answer entity.
  AnswerPath WithEnd(EntityId end) const;

  bool operator==(const AnswerPath &other) const;
  // Orders by (start, hops, first relation, intermediate, second relation,
  // end), which sorts paths from one entity by relation id then entity id.
  std::strong_ordering operator<=>(const AnswerPath &other) const;

 private:
  AnswerPath() = default;

  EntityId start_;
  EntityId middle_;
  EntityId end_;
  std::array<RelationId, 2> relations_{};
  int hops_ = 0;
};

struct GraphOptions {
  // Materialize a reversed relation token "inv:<name>" per relation type so
  // that edges can also be followed object -> subject.
  bool inverse_relations = false;
};

// Immutable triple store with forward and backward adjacency, entity names
// and popularity counts. Safe for concurrent reads.
class KnowledgeGraph {
 public:
  static constexpr std::string_view kInversePrefix = "inv:";

  KnowledgeGraph() = default;

  // Parses the line-oriented triple format:
  //   subject<TAB>relation<TAB>object
  //   #name<TAB>entity<TAB>name string
  //   # comment
  // Duplicate triples are collapsed. Throws ParseError on malformed lines.
  static KnowledgeGraph Parse(std::istream &input, GraphOptions options = {});
  static KnowledgeGraph ParseString(std::string_view text,
                                    GraphOptions options = {});
  static KnowledgeGraph LoadFile(const std::string &path,
                                 GraphOptions options = {});

  // Writes the graph back in the text format accepted by Parse.
  void Write(std::ostream &output) const;

  const GraphOptions &options() const { return options_; }

  size_t entity_count() const { return entity_names_.size(); }
  // Number of registered relation tokens, including inverse tokens.
  size_t relation_count() const { return relation_names_.size(); }
  // Number of relation types that occur in triples.
  size_t base_relation_count() const { return base_relation_count_; }
  size_t triple_count() const { return triples_.size(); }

  const std::vector<Triple> &triples() const { return triples_; }

  const std::string &entity_name(EntityId e) const;
  const std::string &relation_name(RelationId r) const;
  std::optional<EntityId> FindEntity(std::string_view name) const;
  std::optional<RelationId> FindRelation(std::string_view name) const;
  EntityId GetEntity(std::string_view name) const;      // throws NotFoundError
  RelationId GetRelation(std::string_view name) const;  // throws NotFoundError

  bool IsInverse(RelationId r) const;
  // Maps a base relation to its inverse token and back. Requires
  // inverse_relations.
  RelationId Inverse(RelationId r) const;

  // Sorted by (relation, entity).
  std::span<const Edge> OutEdges(EntityId e) const;
  std::span<const Edge> InEdges(EntityId e) const;
  // Edges a path may follow from e under the traversal policy: the out edges,
  // plus reversed in edges when inverse relations are enabled.
  std::span<const Edge> TraversableEdges(EntityId e) const;
  bool HasEdge(EntityId from, RelationId relation, EntityId to) const;

  // Explicit #name strings of an entity.
  const std::vector<std::string> &names(EntityId e) const;
  uint32_t popularity(EntityId e) const;

  // Returns every name (explicit names plus the entity identifier itself),
  // tokenized, for string matching.
  struct NameEntry {
    std::vector<std::string> tokens;
    EntityId entity;
  };
  const std::vector<NameEntry> &name_entries() const { return name_entries_; }
  // Positions in name_entries() of names whose first token is `token`.
  std::span<const uint32_t> NamesStartingWith(const std::string &token) const;

  void CheckEntity(EntityId e) const;  // throws NotFoundError
  void CheckRelation(RelationId r) const;

 private:
  friend class GraphBuilder;

  GraphOptions options_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_lookup_;
  std::unordered_map<std::string, RelationId> relation_lookup_;
  size_t base_relation_count_ = 0;
  std::vector<Triple> triples_;
  std::vector<std::vector<Edge>> out_index_;
  std::vector<std::vector<Edge>> in_index_;
  std::vector<std::vector<Edge>> traversal_index_;
  std::vector<std::vector<std::string>> names_;
  std::vector<uint32_t> popularity_;
  std::vector<NameEntry> name_entries_;
  // First name token -> positions in name_entries_.
  std::unordered_map<std::string, std::vector<uint32_t>> name_heads_;
};

// Incremental construction of a KnowledgeGraph. Entities and relations get
// ids in order of first registration.
class GraphBuilder {
 public:
  explicit GraphBuilder(GraphOptions options = {}) : options_(options) {}

  EntityId AddEntity(std::string_view name);
  RelationId AddRelation(std::string_view name);
  void AddTriple(std::string_view subject, std::string_view relation,
                 std::string_view object);
  void AddName(std::string_view entity, std::string_view name);

  KnowledgeGraph Build() &&;

 private:
  GraphOptions options_;
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, EntityId> entity_lookup_;
  std::unordered_map<std::string, RelationId> relation_lookup_;
  std::vector<Triple> triples_;
  std::vector<std::vector<std::string>> names_;
};

using RelationSet = std::set<RelationId>;

// All paths (e, r, o) for traversable edges from e, sorted.
std::vector<AnswerPath> OneHopPaths(const KnowledgeGraph &graph, EntityId e);

// All paths (e, r1, m, r2, o) whose both edges are traversable. With a
// filter, a path is kept when either relation is in the set. Sorted.
std::vector<AnswerPath> TwoHopPaths(const KnowledgeGraph &graph, EntityId e,
                                    const RelationSet *allowed = nullptr);

// Union of in- and out-neighbors of e with their base relation types,
// deduplicated and sorted by (relation, entity).
std::vector<Edge> SubgraphNeighbors(const KnowledgeGraph &graph, EntityId e);

// String-matching entity resolution. Among names that occur as contiguous
// token subsequences of the question, picks the longest name, then the most
// popular entity, then the lowest id. Returns nullopt if nothing matches.
std::optional<EntityId> ResolveEntity(const KnowledgeGraph &graph,
                                      const std::vector<std::string> &words);

}  // namespace kbqa

template <typename Tag>
struct std::hash<kbqa::Id<Tag>> {
  size_t operator()(kbqa::Id<Tag> id) const noexcept {
    return std::hash<uint32_t>()(id.value);
  }
};

#endif  // KBQA_KB_STORE_H_
