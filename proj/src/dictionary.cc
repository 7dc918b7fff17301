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

#include "kbqa/dictionary.h"

#include <fstream>

#include "kbqa/error.h"
#include "kbqa/text.h"

namespace kbqa {

Dictionary Dictionary::Build(const KnowledgeGraph &graph,
                             const std::vector<std::string> &words,
                             DictionaryOptions options) {
  Dictionary d;
  d.options_ = options;
  for (const auto &w : words) {
    if (w.empty() || d.word_lookup_.contains(w)) continue;
    d.word_lookup_.emplace(w, static_cast<FeatureIndex>(d.words_.size()));
    d.words_.push_back(w);
  }
  for (uint32_t e = 0; e < graph.entity_count(); ++e) {
    d.entities_.push_back(graph.entity_name(EntityId{e}));
  }
  for (uint32_t r = 0; r < graph.relation_count(); ++r) {
    d.relations_.push_back(graph.relation_name(RelationId{r}));
  }
  return d;
}

size_t Dictionary::size() const {
  size_t n = words_.size() + 2 * entities_.size() + relations_.size();
  if (options_.double_relations) n += relations_.size();
  return n;
}

std::optional<FeatureIndex> Dictionary::WordIndex(std::string_view word) const {
  auto it = word_lookup_.find(std::string(word));
  if (it == word_lookup_.end()) return std::nullopt;
  return it->second;
}

FeatureIndex Dictionary::EntityIndex(EntityId e, Role role) const {
  if (e.value >= entities_.size()) {
    throw NotFoundError("entity id " + std::to_string(e.value) +
                        " is not in the dictionary");
  }
  FeatureIndex i = static_cast<FeatureIndex>(words_.size()) + e.value;
  if (role == Role::kSubgraph) i += static_cast<FeatureIndex>(symbol_count());
  return i;
}

FeatureIndex Dictionary::RelationIndex(RelationId r, Role role) const {
  if (r.value >= relations_.size()) {
    throw NotFoundError("relation id " + std::to_string(r.value) +
                        " is not in the dictionary");
  }
  FeatureIndex i = static_cast<FeatureIndex>(words_.size() + entities_.size()) +
                   r.value;
  if (role == Role::kSubgraph && options_.double_relations) {
    i += static_cast<FeatureIndex>(symbol_count());
  }
  return i;
}

void Dictionary::CheckCompatible(const KnowledgeGraph &graph) const {
  if (graph.entity_count() != entities_.size() ||
      graph.relation_count() != relations_.size()) {
    throw DimensionError(
        "dictionary has " + std::to_string(entities_.size()) + " entities/" +
        std::to_string(relations_.size()) + " relations, graph has " +
        std::to_string(graph.entity_count()) + "/" +
        std::to_string(graph.relation_count()));
  }
  for (uint32_t e = 0; e < entities_.size(); ++e) {
    if (graph.entity_name(EntityId{e}) != entities_[e]) {
      throw DimensionError("entity " + std::to_string(e) +
                           " differs between dictionary and graph");
    }
  }
  for (uint32_t r = 0; r < relations_.size(); ++r) {
    if (graph.relation_name(RelationId{r}) != relations_[r]) {
      throw DimensionError("relation " + std::to_string(r) +
                           " differs between dictionary and graph");
    }
  }
}

void Dictionary::Save(std::ostream &output) const {
  size_t index = 0;
  for (const auto &w : words_) output << "word\t" << w << '\t' << index++ << '\n';
  for (const auto &e : entities_) {
    output << "entity\t" << e << '\t' << index++ << '\n';
  }
  for (const auto &r : relations_) {
    output << "relation\t" << r << '\t' << index++ << '\n';
  }
  for (const auto &e : entities_) {
    output << "sub_entity\t" << e << '\t' << index++ << '\n';
  }
  if (options_.double_relations) {
    for (const auto &r : relations_) {
      output << "sub_relation\t" << r << '\t' << index++ << '\n';
    }
  }
}

Dictionary Dictionary::Load(std::istream &input) {
  // Sections must appear in canonical order with contiguous indexes.
  enum Section { kWord, kEntity, kRelation, kSubEntity, kSubRelation };
  static const char *kKinds[] = {"word", "entity", "relation", "sub_entity",
                                 "sub_relation"};
  Dictionary d;
  d.options_.double_relations = false;
  int section = kWord;
  size_t next_index = 0;
  size_t sub_entities = 0;
  size_t sub_relations = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected kind<TAB>string<TAB>index");
    }
    int kind = -1;
    for (int k = 0; k < 5; ++k) {
      if (fields[0] == kKinds[k]) kind = k;
    }
    if (kind < 0) {
      throw ParseError(line_no, "unknown symbol kind '" +
                                    std::string(fields[0]) + "'");
    }
    if (kind < section) throw ParseError(line_no, "symbol kinds out of order");
    section = kind;
    size_t index = 0;
    try {
      index = std::stoull(std::string(fields[2]));
    } catch (const std::exception &) {
      throw ParseError(line_no, "bad index");
    }
    if (index != next_index) {
      throw ParseError(line_no, "expected index " + std::to_string(next_index));
    }
    ++next_index;
    std::string value(fields[1]);
    switch (kind) {
      case kWord:
        if (d.word_lookup_.contains(value)) {
          throw ParseError(line_no, "duplicate word '" + value + "'");
        }
        d.word_lookup_.emplace(value, static_cast<FeatureIndex>(index));
        d.words_.push_back(std::move(value));
        break;
      case kEntity:
        d.entities_.push_back(std::move(value));
        break;
      case kRelation:
        d.relations_.push_back(std::move(value));
        break;
      case kSubEntity:
        if (sub_entities >= d.entities_.size() ||
            d.entities_[sub_entities] != value) {
          throw ParseError(line_no, "subgraph entity does not mirror entity");
        }
        ++sub_entities;
        break;
      case kSubRelation:
        if (sub_relations >= d.relations_.size() ||
            d.relations_[sub_relations] != value) {
          throw ParseError(line_no,
                           "subgraph relation does not mirror relation");
        }
        ++sub_relations;
        break;
    }
  }
  if (sub_entities != d.entities_.size()) {
    throw ParseError(line_no, "missing subgraph entity entries");
  }
  if (sub_relations != 0) {
    if (sub_relations != d.relations_.size()) {
      throw ParseError(line_no, "missing subgraph relation entries");
    }
    d.options_.double_relations = true;
  } else {
    d.options_.double_relations = d.relations_.empty();
  }
  return d;
}

void Dictionary::SaveFile(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dictionary " + path);
  Save(out);
}

Dictionary Dictionary::LoadFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dictionary " + path);
  return Load(in);
}

}  // namespace kbqa
