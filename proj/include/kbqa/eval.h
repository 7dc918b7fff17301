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

#ifndef KBQA_EVAL_H_
#define KBQA_EVAL_H_

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace kbqa {

// Set F1 between predicted and gold answers (duplicates ignored). 0 when
// either side is empty.
double ExampleF1(std::vector<std::string> predicted,
                 std::vector<std::string> gold);

// Outcome of answering one question.
struct QuestionOutcome {
  bool answered = false;
  // Best first; only meaningful when answered.
  std::vector<std::string> predicted;
  std::vector<std::string> gold;
};

// 1 iff the question was answered and its first predicted entity is gold.
double PrecisionAtOne(const QuestionOutcome &outcome);

enum class F1Mode {
  kBerant,  // mean over all questions, unanswered count as 0
  kYao,     // mean over answered questions only
};

struct Aggregate {
  double value = 0.0;
  // Yao mode with no answered question: value is reported as 0.
  bool undefined = false;
};

// Throws Error on an empty list.
Aggregate AggregateF1(std::span<const QuestionOutcome> outcomes, F1Mode mode);
double MeanPrecisionAtOne(std::span<const QuestionOutcome> outcomes);

struct MetricsReport {
  size_t questions = 0;
  size_t answered = 0;
  double precision_at_1 = 0.0;
  double f1_berant = 0.0;
  double f1_yao = 0.0;
  bool yao_undefined = false;
};

MetricsReport ComputeMetrics(std::span<const QuestionOutcome> outcomes);

// Rows P@1, F1-berant, F1-yao as a tab-separated table.
std::string FormatMetrics(const MetricsReport &report);

// One line of a batch prediction file:
//   question<TAB>entity;entity...<TAB>score<TAB>signature
// Unanswered questions have no entities, score "-inf" and signature "none".
struct PredictionRecord {
  std::string question;
  std::vector<std::string> entities;
  double score = 0.0;
  std::string signature;

  bool answered() const { return !entities.empty(); }
};

void WritePredictions(std::ostream &output,
                      std::span<const PredictionRecord> records);
std::vector<PredictionRecord> ReadPredictions(std::istream &input);

struct EnsembleResult {
  std::vector<PredictionRecord> combined;
  // Per question: true if the own system's prediction was used.
  std::vector<bool> used_own;
  double threshold = 0.0;
  double realized_fraction = 0.0;
};

// Uses the own prediction where its score reaches the threshold that lets it
// answer `fraction` of the questions, and the other system's elsewhere. Ties
// at the threshold go to the own system. Throws Error if the lists differ in
// length or question text.
EnsembleResult EnsembleCombine(std::span<const PredictionRecord> own,
                               std::span<const PredictionRecord> other,
                               double fraction = 0.5);

}  // namespace kbqa

#endif  // KBQA_EVAL_H_
