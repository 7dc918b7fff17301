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

#include "kbqa/inference.h"

#include <algorithm>
#include <map>
#include <numeric>

#include "kbqa/error.h"

namespace kbqa {

const char *StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kC1:
      return "c1";
    case Strategy::kC2:
      return "c2";
    case Strategy::kAll2:
      return "all2";
  }
  return "?";
}

Strategy ParseStrategy(const std::string &name) {
  if (name == "c1") return Strategy::kC1;
  if (name == "c2") return Strategy::kC2;
  if (name == "all2") return Strategy::kAll2;
  throw ConfigError("unknown candidate strategy '" + name + "'");
}

CandidateSet CandidatesC1(const KnowledgeGraph &graph, EntityId e) {
  CandidateSet set{Strategy::kC1, {}};
  for (auto &p : OneHopPaths(graph, e)) set.entries.push_back({p, 1.0});
  return set;
}

CandidateSet CandidatesAll2(const KnowledgeGraph &graph, EntityId e) {
  CandidateSet set{Strategy::kAll2, {}};
  for (auto &p : OneHopPaths(graph, e)) set.entries.push_back({p, 1.0});
  for (auto &p : TwoHopPaths(graph, e)) set.entries.push_back({p, 1.0});
  return set;
}

std::vector<RelationId> RankRelationTypes(const EmbeddingMatrix &w,
                                          const Dictionary &dict,
                                          const SparseVector &question,
                                          size_t top_n) {
  const std::vector<double> q = Embed(w, question);
  std::vector<std::pair<double, uint32_t>> scored;
  scored.reserve(dict.relation_count());
  for (uint32_t r = 0; r < dict.relation_count(); ++r) {
    const FeatureIndex i = dict.RelationIndex(RelationId{r}, Role::kPath);
    scored.emplace_back(Dot(q, w.column(i)), r);
  }
  std::sort(scored.begin(), scored.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<RelationId> ranked;
  for (size_t i = 0; i < std::min(top_n, scored.size()); ++i) {
    ranked.push_back(RelationId{scored[i].second});
  }
  return ranked;
}

CandidateSet CandidatesC2(const KnowledgeGraph &graph, EntityId e,
                          const EmbeddingMatrix &w, const Dictionary &dict,
                          const SparseVector &question, size_t top_n,
                          double one_hop_weight) {
  CandidateSet set{Strategy::kC2, {}};
  for (auto &p : OneHopPaths(graph, e)) {
    set.entries.push_back({p, one_hop_weight});
  }
  const auto ranked = RankRelationTypes(w, dict, question, top_n);
  const RelationSet keep(ranked.begin(), ranked.end());
  for (auto &p : TwoHopPaths(graph, e, &keep)) set.entries.push_back({p, 1.0});
  return set;
}

namespace {

PathSignature SignatureOf(const AnswerPath &p) {
  auto rels = p.relations();
  return {p.start(), std::vector<RelationId>(rels.begin(), rels.end())};
}

// True if candidate (score a, signature sa) ranks before (score b, sb):
// higher score, then fewer hops, then lexicographically smaller signature.
bool RanksBefore(double a, const PathSignature &sa, double b,
                 const PathSignature &sb) {
  if (a != b) return a > b;
  if (sa.relations.size() != sb.relations.size()) {
    return sa.relations.size() < sb.relations.size();
  }
  return sa < sb;
}

}  // namespace

Predictor::Predictor(const EmbeddingMatrix &w, const Dictionary &dict,
                     const KnowledgeGraph &graph, InferenceOptions options)
    : w_(&w),
      dict_(&dict),
      graph_(&graph),
      options_(options),
      featurizer_(graph, dict, options.representation, options.subgraph_cap) {
  if (w.columns() != dict.size()) {
    throw DimensionError("model has N = " + std::to_string(w.columns()) +
                         " but dictionary has " + std::to_string(dict.size()));
  }
}

CandidateSet Predictor::Candidates(const SparseVector &question,
                                   EntityId entity) const {
  switch (options_.strategy) {
    case Strategy::kC1:
      return CandidatesC1(*graph_, entity);
    case Strategy::kC2:
      return CandidatesC2(*graph_, entity, *w_, *dict_, question,
                          options_.top_relations, options_.one_hop_weight);
    case Strategy::kAll2:
      return CandidatesAll2(*graph_, entity);
  }
  return {};
}

Prediction Predictor::Predict(const std::vector<std::string> &words) const {
  const auto entity = ResolveEntity(*graph_, words);
  if (!entity) return {};
  return PredictForEntity(FeaturizeQuestion(*dict_, words), *entity);
}

Prediction Predictor::PredictForEntity(const SparseVector &question,
                                       EntityId entity) const {
  const CandidateSet candidates = Candidates(question, entity);
  if (candidates.entries.empty()) return {};
  const std::vector<double> q = Embed(*w_, question);

  struct Scored {
    const CandidateEntry *entry;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.entries.size());
  for (const auto &c : candidates.entries) {
    const double s = Dot(q, Embed(*w_, featurizer_.Featurize(c.path)));
    scored.push_back({&c, c.weight * s});
  }

  Prediction best;
  if (!options_.group) {
    const Scored *top = nullptr;
    PathSignature top_sig;
    for (const auto &s : scored) {
      PathSignature sig = SignatureOf(s.entry->path);
      if (top == nullptr || RanksBefore(s.score, sig, top->score, top_sig) ||
          (s.score == top->score && sig == top_sig &&
           s.entry->path.end() < top->entry->path.end())) {
        top = &s;
        top_sig = std::move(sig);
      }
    }
    best.answered = true;
    best.signature = std::move(top_sig);
    best.entities = {top->entry->path.end()};
    best.score = top->score;
    return best;
  }

  // Group candidates sharing a signature; a group's features are the mean of
  // its distinct answer entities' features.
  std::map<PathSignature, std::vector<const Scored *>> groups;
  for (const auto &s : scored) groups[SignatureOf(s.entry->path)].push_back(&s);

  bool have = false;
  for (auto &[sig, members] : groups) {
    std::sort(members.begin(), members.end(),
              [](const Scored *a, const Scored *b) {
                if (a->score != b->score) return a->score > b->score;
                return a->entry->path.end() < b->entry->path.end();
              });
    std::vector<EntityId> entities;
    std::vector<AnswerPath> representatives;
    for (const Scored *m : members) {
      const EntityId end = m->entry->path.end();
      if (std::find(entities.begin(), entities.end(), end) != entities.end()) {
        continue;
      }
      entities.push_back(end);
      representatives.push_back(m->entry->path);
    }
    const double weight = members.front()->entry->weight;
    const double score =
        weight * Dot(q, Embed(*w_, featurizer_.FeaturizeAll(representatives)));
    if (!have || RanksBefore(score, sig, best.score, best.signature)) {
      have = true;
      best.answered = true;
      best.signature = sig;
      best.entities = std::move(entities);
      best.score = score;
    }
  }
  return best;
}

std::string Predictor::FormatSignature(const PathSignature &signature) const {
  std::string out = graph_->entity_name(signature.start) + ":";
  for (size_t i = 0; i < signature.relations.size(); ++i) {
    if (i > 0) out += '|';
    out += graph_->relation_name(signature.relations[i]);
  }
  return out;
}

}  // namespace kbqa
