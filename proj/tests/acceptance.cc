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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kbqa/datagen.h"
#include "kbqa/dictionary.h"
#include "kbqa/eval.h"
#include "kbqa/features.h"
#include "kbqa/inference.h"
#include "kbqa/kb_store.h"
#include "kbqa/model.h"
#include "kbqa/text.h"
#include "kbqa/training.h"
#include "test_util.h"

namespace kbqa {
namespace {

int failures = 0;

void Report(int criterion, bool pass, const std::string &detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string Fmt(const char *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

SparseVector RandomSparse(std::mt19937_64 &rng, size_t n, int nnz) {
  std::vector<SparseVector::Entry> e;
  for (int i = 0; i < nnz; ++i) {
    e.emplace_back(static_cast<FeatureIndex>(rng() % n), 1 + rng() % 2);
  }
  return SparseVector::FromEntries(std::move(e));
}

double Hinge(const EmbeddingMatrix &w, const SparseVector &x,
             const SparseVector &y, const SparseVector &z, double m) {
  return std::max(0.0, m - Score(w, x, y) + Score(w, x, z));
}

// Relative error between the applied update and central differences of the
// hinge, with norms kept small so that projection does not engage.
double GradientError(EmbeddingMatrix w, const SparseVector &x,
                     const SparseVector &y, const SparseVector &z,
                     const std::function<void(EmbeddingMatrix &)> &step) {
  const double lr = 1e-3, m = 0.1, h = 1e-5;
  EmbeddingMatrix after = w;
  step(after);
  double diff2 = 0, norm2 = 0;
  for (size_t i = 0; i < w.dim() * w.columns(); ++i) {
    EmbeddingMatrix plus = w, minus = w;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    const double fd =
        (Hinge(plus, x, y, z, m) - Hinge(minus, x, y, z, m)) / (2 * h);
    const double analytic = (w.data()[i] - after.data()[i]) / lr;
    diff2 += (fd - analytic) * (fd - analytic);
    norm2 += fd * fd;
  }
  return std::sqrt(diff2 / norm2);
}

void GradientCriterion() {
  std::mt19937_64 rng(101);
  const double lr = 1e-3, m = 0.1;
  double worst = 0;
  int instances = 0;
  for (int task = 0; task < 3; ++task) {
    for (int trial = 0; trial < 100; ++trial) {
      const size_t k = 1 + rng() % 8;
      // Name steps need a dictionary; N = 6 words + 2 * (8 + 3) = 28.
      KnowledgeGraph g = testing::RandomGraph(rng, 8, 3, 12);
      Dictionary d = Dictionary::Build(g, {"a", "b", "c", "d", "e", "f"});
      const size_t n = task == 2 ? d.size() : 10 + rng() % 41;
      EmbeddingMatrix w = EmbeddingMatrix::RandomInit(k, n, rng());
      for (size_t i = 0; i < k * n; ++i) w.data()[i] *= 0.2;
      SparseVector x, y, z;
      EntityId e1, e2;
      do {
        if (task == 2) {
          x = RandomSparse(rng, d.word_count(), 2);
          e1 = {static_cast<uint32_t>(rng() % 8)};
          e2 = {static_cast<uint32_t>((e1.value + 1 + rng() % 7) % 8)};
          y = SparseVector::OneHot(d.EntityIndex(e1));
          z = SparseVector::OneHot(d.EntityIndex(e2));
        } else {
          x = RandomSparse(rng, n, 3);
          y = RandomSparse(rng, n, 3);
          z = RandomSparse(rng, n, 3);
        }
      } while (Hinge(w, x, y, z, m) < 0.05);
      double err = GradientError(w, x, y, z, [&](EmbeddingMatrix &v) {
        if (task == 0) HingeStep(v, x, y, z, lr, m);
        if (task == 1) ParaphraseStep(v, x, y, z, lr, m);
        if (task == 2) NameMappingStep(v, d, e1, x, e2, lr, m);
      });
      worst = std::max(worst, err);
      ++instances;
    }
  }
  Report(1, worst < 1e-4,
         Fmt("%d instances (hinge, paraphrase, name), max relative error %.2e",
             instances, worst));
}

void BeamCriterion() {
  std::mt19937_64 rng(103);
  bool exact = true, subset = true;
  size_t checked = 0;
  for (int graph = 0; graph < 50; ++graph) {
    const size_t entities = 5 + rng() % 26, relations = 2 + rng() % 5;
    KnowledgeGraph g =
        testing::RandomGraph(rng, entities, relations, entities * 3);
    Dictionary d = Dictionary::Build(g, {"a", "b", "c"});
    EmbeddingMatrix w = EmbeddingMatrix::RandomInit(8, d.size(), rng());
    SparseVector q = RandomSparse(rng, d.word_count(), 2);
    for (uint32_t e = 0; e < g.entity_count(); ++e) {
      std::set<AnswerPath> all;
      for (const auto &c : CandidatesAll2(g, {e}).entries) all.insert(c.path);
      for (size_t top = 0; top <= relations; ++top) {
        std::set<AnswerPath> c2;
        for (const auto &c : CandidatesC2(g, {e}, w, d, q, top).entries) {
          c2.insert(c.path);
        }
        if (top == relations) {
          exact = exact && c2 == all;
        } else {
          subset = subset &&
                   std::includes(all.begin(), all.end(), c2.begin(), c2.end());
        }
        ++checked;
      }
    }
  }
  Report(3, exact && subset,
         Fmt("50 graphs, %zu candidate sets: full beam equals ALL2: %s, "
             "narrow beam is a subset: %s",
             checked, exact ? "yes" : "no", subset ? "yes" : "no"));
}

void CardinalityCriterion() {
  std::mt19937_64 rng(107);
  size_t paths = 0, bad_path = 0, bad_sub = 0;
  while (paths < 1000) {
    KnowledgeGraph g = testing::RandomGraph(rng, 20, 5, 60);
    Dictionary d = Dictionary::Build(g, {"w"});
    for (uint32_t e = 0; e < g.entity_count() && paths < 1000; ++e) {
      std::vector<AnswerPath> cands = CandidatePaths(g, {e});
      if (cands.empty()) continue;
      const AnswerPath &p = cands[rng() % cands.size()];
      // Degenerate paths (start = end, or one relation twice) code a repeated
      // symbol as a count of 2 and have fewer nonzeros.
      std::set<RelationId> rels(p.relations().begin(), p.relations().end());
      if (p.start() == p.end() || rels.size() != p.relations().size()) {
        continue;
      }
      SparseVector pf = FeaturizeAnswerPath(d, p);
      const size_t want = p.hops() == 1 ? 3 : 4;
      if (pf.nonzeros() != want) ++bad_path;
      auto nb = SubgraphNeighbors(g, p.end());
      std::set<EntityId> c;
      std::set<RelationId> r;
      for (const Edge &edge : nb) {
        c.insert(edge.entity);
        r.insert(edge.relation);
      }
      if (FeaturizeAnswerSubgraph(d, p, nb).nonzeros() !=
          want + c.size() + r.size()) {
        ++bad_sub;
      }
      ++paths;
    }
  }
  Report(4, bad_path == 0 && bad_sub == 0,
         Fmt("%zu paths: %zu path-count mismatches, %zu subgraph-count "
             "mismatches",
             paths, bad_path, bad_sub));
}

void SamplingCriterion(const ToyWorld &world, const Dictionary &dict,
                       const TrainingData &data) {
  AnswerFeaturizer f(world.graph, dict, Representation::kSubgraph);
  std::mt19937_64 rng(109);
  const int draws = 10000;
  int connected = 0;
  std::vector<std::vector<AnswerPath>> pools(data.qa.size());
  for (int i = 0; i < draws; ++i) {
    const size_t idx = rng() % data.qa.size();
    const TrainingExample &ex = data.qa[idx];
    if (pools[idx].empty()) pools[idx] = CandidatePaths(world.graph, ex.entity);
    connected += SampleNegative(ex, world.graph, pools[idx], f, rng).connected;
  }
  const double rate = connected / static_cast<double>(draws);
  Report(8, std::abs(rate - 0.5) <= 0.02,
         Fmt("connected branch rate %.4f over %d draws", rate, draws));
}

struct Evaluation {
  MetricsReport metrics;
  std::vector<QuestionOutcome> outcomes;
};

Evaluation Evaluate(const ToyWorld &world, const EmbeddingMatrix &w,
                    const Dictionary &dict, InferenceOptions options,
                    const std::vector<std::string> &extra = {}) {
  Predictor predictor(w, dict, world.graph, options);
  Evaluation ev;
  auto add = [&](const std::string &question, std::vector<std::string> gold) {
    Prediction p = predictor.Predict(Tokenize(question));
    QuestionOutcome o{p.answered, {}, std::move(gold)};
    for (EntityId e : p.entities) {
      o.predicted.push_back(world.graph.entity_name(e));
    }
    ev.outcomes.push_back(std::move(o));
  };
  for (const QaRecord &r : world.test) add(r.question, GoldEntities(world.graph, r));
  for (const std::string &q : extra) add(q, {"nothing"});
  ev.metrics = ComputeMetrics(ev.outcomes);
  return ev;
}

// Scores of every test candidate; compared bit for bit.
std::vector<double> ProbeScores(const ToyWorld &world, const EmbeddingMatrix &w,
                                const Dictionary &dict) {
  AnswerFeaturizer f(world.graph, dict, Representation::kSubgraph);
  std::vector<double> scores;
  for (const QaRecord &r : world.test) {
    SparseVector q = FeaturizeQuestion(dict, Tokenize(r.question));
    for (const auto &c : CandidatesAll2(world.graph, r.entity).entries) {
      scores.push_back(Score(w, q, f.Featurize(c.path)));
    }
  }
  return scores;
}

std::string Bytes(const EmbeddingMatrix &w) {
  std::ostringstream out;
  w.Save(out);
  return out.str();
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       since)
      .count();
}

int Run() {
  const auto start = std::chrono::steady_clock::now();
  GradientCriterion();

  ToyWorldConfig wc;
  wc.seed = 7;
  const ToyWorld world = MakeToyWorld(wc);
  const KnowledgeGraph &g = world.graph;
  const Dictionary dict = Dictionary::Build(
      g, CollectVocabulary(g, world.train, world.paraphrases));
  const TrainingData data = MakeTrainingData(g, dict, world.train, {}, false);
  size_t two_hop = 0, multi = 0;
  for (const QaRecord &r : world.test) {
    two_hop += r.answers[0].hops() == 2;
    multi += GoldEntities(g, r).size() > 1;
  }
  const double two_share = two_hop / static_cast<double>(world.test.size());
  const double multi_share = multi / static_cast<double>(world.test.size());
  std::printf("toy world: %zu entities, %zu triples, %zu train, %zu test, "
              "%.0f%% two-hop, %.0f%% multi-answer\n",
              g.entity_count(), g.triple_count(), world.train.size(),
              world.test.size(), 100 * two_share, 100 * multi_share);

  TrainConfig base;
  base.dim = 128;
  base.learning_rate = 0.005;
  base.negatives_per_example = 10;
  base.epochs = 100;
  base.seed = 3;
  base.mix = {1, 0, 0};

  double max_norm = 0;
  int epochs_checked = 0;
  auto watch = [&](int, const EmbeddingMatrix &w) {
    max_norm = std::max(max_norm, w.MaxColumnNorm());
    ++epochs_checked;
  };
  auto train = [&](Representation rep, int workers) {
    TrainConfig c = base;
    c.representation = rep;
    c.workers = workers;
    return TrainMultitask(data, g, dict, c, watch);
  };

  const TrainResult subgraph = train(Representation::kSubgraph, 1);
  const TrainResult path = train(Representation::kPath, 1);
  const TrainResult entity = train(Representation::kEntity, 1);

  InferenceOptions c2{.strategy = Strategy::kC2,
                      .representation = Representation::kSubgraph};
  const Evaluation sub_c2 = Evaluate(world, subgraph.weights, dict, c2);
  InferenceOptions c1 = c2;
  c1.strategy = Strategy::kC1;
  const Evaluation sub_c1 = Evaluate(world, subgraph.weights, dict, c1);
  InferenceOptions path_c2 = c2;
  path_c2.representation = Representation::kPath;
  const Evaluation path_eval = Evaluate(world, path.weights, dict, path_c2);
  InferenceOptions entity_c2 = c2;
  entity_c2.representation = Representation::kEntity;
  const Evaluation entity_eval =
      Evaluate(world, entity.weights, dict, entity_c2);

  const double p_sub = sub_c2.metrics.precision_at_1;
  Report(5, p_sub >= 0.95,
         Fmt("subgraph + C2 test P@1 %.3f after %d epochs", p_sub,
             base.epochs));

  const double p_path = path_eval.metrics.precision_at_1;
  const double p_ent = entity_eval.metrics.precision_at_1;
  const double p_c1 = sub_c1.metrics.precision_at_1;
  const bool sub_ok = p_sub >= p_path + 0.02;
  const bool path_ok = p_path >= p_ent + 0.02;
  const bool c2_ok = two_share >= 0.3 && p_sub >= p_c1 + 0.02;
  Report(6, sub_ok && path_ok && c2_ok,
         Fmt("P@1 subgraph %.3f vs path %.3f (%s), path vs entity %.3f "
             "(%s), C2 %.3f vs C1 %.3f with %.0f%% two-hop (%s)",
             p_sub, p_path, sub_ok ? "ok" : "short", p_ent,
             path_ok ? "ok" : "short", p_sub, p_c1, 100 * two_share,
             c2_ok ? "ok" : "short"));

  InferenceOptions ungrouped = c2;
  ungrouped.group = false;
  const Evaluation flat = Evaluate(world, subgraph.weights, dict, ungrouped);
  Report(7, multi_share >= 0.2 && flat.metrics.f1_berant < sub_c2.metrics.f1_berant,
         Fmt("F1 grouped %.3f vs ungrouped %.3f with %.0f%% multi-answer",
             sub_c2.metrics.f1_berant, flat.metrics.f1_berant,
             100 * multi_share));

  SamplingCriterion(world, dict, data);

  const Evaluation with_gap = Evaluate(world, subgraph.weights, dict, c2,
                                       {"who is the zzyzx of nobody ?"});
  const bool all_answered = sub_c2.metrics.answered == sub_c2.metrics.questions;
  const bool equal = sub_c2.metrics.f1_berant == sub_c2.metrics.f1_yao;
  const bool ordered = with_gap.metrics.answered < with_gap.metrics.questions &&
                       with_gap.metrics.f1_berant <= with_gap.metrics.f1_yao;
  Report(9, all_answered && equal && ordered,
         Fmt("all answered: Berant %.6f = Yao %.6f; one unanswered: Berant "
             "%.6f <= Yao %.6f",
             sub_c2.metrics.f1_berant, sub_c2.metrics.f1_yao,
             with_gap.metrics.f1_berant, with_gap.metrics.f1_yao));

  {
    TrainConfig c = base;
    c.epochs = 10;
    const std::string first = Bytes(TrainMultitask(data, g, dict, c).weights);
    const std::string second = Bytes(TrainMultitask(data, g, dict, c).weights);
    std::istringstream in(Bytes(subgraph.weights));
    const EmbeddingMatrix loaded = EmbeddingMatrix::Load(in);
    const bool same_scores = ProbeScores(world, loaded, dict) ==
                             ProbeScores(world, subgraph.weights, dict);
    Report(10, first == second && same_scores,
           Fmt("repeat run byte-identical: %s; reloaded model scores "
               "bit-identical: %s",
               first == second ? "yes" : "no", same_scores ? "yes" : "no"));
  }

  const TrainResult parallel = train(Representation::kSubgraph, 4);
  // Final training loss: the QA hinge of each final matrix over the whole
  // training set, 100 fixed negatives per question.
  TrainConfig loss_cfg = base;
  loss_cfg.representation = Representation::kSubgraph;
  const double single_loss =
      MeanQaLoss(subgraph.weights, data, g, dict, loss_cfg, 99, 100);
  const double parallel_loss =
      MeanQaLoss(parallel.weights, data, g, dict, loss_cfg, 99, 100);
  const double rel = std::abs(parallel_loss - single_loss) / single_loss;
  const double p_par =
      Evaluate(world, parallel.weights, dict, c2).metrics.precision_at_1;
  Report(11, rel <= 0.1 && p_par >= 0.95,
         Fmt("training loss 4 workers %.5f vs 1 worker %.5f (%.1f%% apart), "
             "4-worker P@1 %.3f",
             parallel_loss, single_loss, 100 * rel, p_par));

  // Every training run above reported the norm bound after each epoch.
  Report(2, max_norm <= 1 + kUnitBallTolerance,
         Fmt("%d epoch ends checked, max column norm %.9f", epochs_checked,
             max_norm));

  BeamCriterion();
  CardinalityCriterion();

  std::printf("%d of 11 criteria failed, %.1f s\n", failures,
              Seconds(start));
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace kbqa

int main() { return kbqa::Run(); }
