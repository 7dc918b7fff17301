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

#ifndef KBQA_TRAINING_H_
#define KBQA_TRAINING_H_

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kbqa/dictionary.h"
#include "kbqa/features.h"
#include "kbqa/kb_store.h"
#include "kbqa/model.h"

namespace kbqa {

enum class Task { kQa = 0, kParaphrase = 1, kName = 2 };
inline constexpr size_t kTaskCount = 3;

const char *TaskName(Task task);

// Relative frequency with which each task is drawn at a training step.
struct TaskMix {
  double qa = 1.0;
  double paraphrase = 1.0;
  double name = 1.0;
};

struct TrainConfig {
  size_t dim = 64;
  double learning_rate = 0.01;
  double margin = 0.1;
  int epochs = 10;
  int negatives_per_example = 1;
  TaskMix mix;
  int workers = 1;
  uint64_t seed = 1;
  size_t subgraph_cap = kDefaultSubgraphCap;
  Representation representation = Representation::kSubgraph;
  // Steps per epoch; 0 picks a value that visits each QA example once per
  // epoch in expectation.
  size_t steps_per_epoch = 0;

  // Throws ConfigError on invalid values.
  void Validate() const;
};

struct TrainingExample {
  SparseVector question;
  // Gold answers, all starting at `entity`.
  std::vector<AnswerPath> answers;
  EntityId entity;
};

struct ParaphraseQuestion {
  uint32_t cluster = 0;
  SparseVector question;
};

struct NameExample {
  EntityId entity;
  SparseVector name;  // bag of the name's words
};

struct TrainingData {
  std::vector<TrainingExample> qa;
  std::vector<ParaphraseQuestion> paraphrases;
  std::vector<NameExample> names;
};

// One SGD step on max{0, m - (W x)^T (W y) + (W x)^T (W z)}. If the hinge is
// active, every column in the union of the supports of x, y and z moves along
// the negative subgradient and is then projected onto the unit ball; other
// columns are never touched. Returns the hinge value before the update.
//
// Column reads and writes are relaxed atomics, so concurrent calls on one
// matrix are well-defined but may lose updates.
double RankingStep(EmbeddingMatrix &w, const SparseVector &anchor,
                   const SparseVector &positive, const SparseVector &negative,
                   double learning_rate, double margin);

// Question vs. correct and incorrect answer features.
inline double HingeStep(EmbeddingMatrix &w, const SparseVector &question,
                        const SparseVector &positive,
                        const SparseVector &negative, double learning_rate,
                        double margin) {
  return RankingStep(w, question, positive, negative, learning_rate, margin);
}

// Question vs. a paraphrase and a question from another cluster.
inline double ParaphraseStep(EmbeddingMatrix &w, const SparseVector &q1,
                             const SparseVector &q2,
                             const SparseVector &negative,
                             double learning_rate, double margin) {
  return RankingStep(w, q1, q2, negative, learning_rate, margin);
}

// Entity name words vs. the entity's path-role embedding and that of another
// entity.
double NameMappingStep(EmbeddingMatrix &w, const Dictionary &dict,
                       EntityId entity, const SparseVector &name,
                       EntityId negative_entity, double learning_rate,
                       double margin);

inline constexpr int kMaxNegativeRetries = 10;

struct NegativeSample {
  AnswerPath path;
  // True if drawn from the candidate paths of the question entity, false if
  // produced by replacing the answer entity with a random one.
  bool connected;
};

// Draws an incorrect answer: half of the time another candidate path of the
// question entity, otherwise a gold path with its answer entity replaced by
// a uniformly random different entity. Never returns an answer whose
// features equal a gold answer's unless retries run out.
NegativeSample SampleNegative(const TrainingExample &example,
                              const KnowledgeGraph &graph,
                              std::span<const AnswerPath> candidates,
                              const AnswerFeaturizer &featurizer,
                              std::mt19937_64 &rng);

// All 1- and 2-hop paths from e; the pool for connected negatives.
std::vector<AnswerPath> CandidatePaths(const KnowledgeGraph &graph,
                                       EntityId e);

struct EpochReport {
  int epoch = 0;
  Task task = Task::kQa;
  // Mean hinge per step; QA steps average over their negatives.
  double mean_loss = 0.0;
  uint64_t steps = 0;
};

// "epoch<TAB>task<TAB>mean_loss<TAB>steps"
std::string FormatEpochReport(const EpochReport &report);

struct TrainResult {
  EmbeddingMatrix weights;
  std::vector<EpochReport> reports;
  std::array<uint64_t, kTaskCount> task_steps{};
  // Paraphrase draws skipped because fewer than two clusters were usable.
  uint64_t skipped_paraphrase_steps = 0;

  // Mean loss of `task` in the given epoch (1-based), or the last epoch if 0.
  double EpochLoss(Task task, int epoch = 0) const;
};

using EpochCallback = std::function<void(int epoch, const EmbeddingMatrix &)>;

// Multitask training with lock-free parallel SGD. Each step draws a task by
// the configured mix and an example uniformly from that task. With one worker
// the result is a deterministic function of the inputs and seed.
TrainResult TrainMultitask(const TrainingData &data,
                           const KnowledgeGraph &graph, const Dictionary &dict,
                           const TrainConfig &config,
                           const EpochCallback &on_epoch_end = {});

// Mean QA hinge loss of a fixed matrix over the dataset with negatives drawn
// from `seed`; no updates.
double MeanQaLoss(const EmbeddingMatrix &w, const TrainingData &data,
                  const KnowledgeGraph &graph, const Dictionary &dict,
                  const TrainConfig &config, uint64_t seed,
                  int negatives_per_example = 10);

}  // namespace kbqa

#endif  // KBQA_TRAINING_H_
