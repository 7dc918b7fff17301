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

#ifndef KBQA_DICTIONARY_H_
#define KBQA_DICTIONARY_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kbqa/kb_store.h"

namespace kbqa {

using FeatureIndex = uint32_t;

// Which copy of a KB symbol's embedding to use: the one for symbols on the
// question-answer path, or the one for symbols in the answer's neighborhood.
enum class Role { kPath, kSubgraph };

struct DictionaryOptions {
  // Give relation types a subgraph-role id too. When off, only entities are
  // doubled and neighbor relation types reuse their path-role id.
  bool double_relations = true;
};

// Unified symbol space shared by question words and KB symbols:
//   [0, W)                  words
//   [W, W + E)              path-role entities
//   [W + E, W + S)          path-role relations       (S = E + R)
//   [W + S, W + S + E)      subgraph-role entities
//   [W + S + E, W + 2S)     subgraph-role relations   (if doubled)
class Dictionary {
 public:
  Dictionary() = default;

  // Registers every entity and relation of the graph plus the given words,
  // deduplicated in first-seen order.
  static Dictionary Build(const KnowledgeGraph &graph,
                          const std::vector<std::string> &words,
                          DictionaryOptions options = {});

  size_t word_count() const { return words_.size(); }
  size_t entity_count() const { return entities_.size(); }
  size_t relation_count() const { return relations_.size(); }
  // N_S: entities plus relation types.
  size_t symbol_count() const { return entities_.size() + relations_.size(); }
  // N: total number of embedding columns.
  size_t size() const;
  bool double_relations() const { return options_.double_relations; }

  std::optional<FeatureIndex> WordIndex(std::string_view word) const;
  FeatureIndex EntityIndex(EntityId e, Role role = Role::kPath) const;
  FeatureIndex RelationIndex(RelationId r, Role role = Role::kPath) const;
  bool IsWordIndex(FeatureIndex i) const { return i < words_.size(); }

  const std::vector<std::string> &words() const { return words_; }

  // Throws DimensionError unless the graph's entity and relation tables
  // match this dictionary name for name.
  void CheckCompatible(const KnowledgeGraph &graph) const;

  // Text manifest, one line per column: kind<TAB>string<TAB>index, with kind
  // in {word, entity, relation, sub_entity, sub_relation}.
  void Save(std::ostream &output) const;
  static Dictionary Load(std::istream &input);
  void SaveFile(const std::string &path) const;
  static Dictionary LoadFile(const std::string &path);

 private:
  DictionaryOptions options_;
  std::vector<std::string> words_;
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, FeatureIndex> word_lookup_;
};

}  // namespace kbqa

#endif  // KBQA_DICTIONARY_H_
