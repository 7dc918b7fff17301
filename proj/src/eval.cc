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

#include "kbqa/eval.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "kbqa/error.h"
#include "kbqa/text.h"

namespace kbqa {

namespace {

void SortUnique(std::vector<std::string> &v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

double ExampleF1(std::vector<std::string> predicted,
                 std::vector<std::string> gold) {
  SortUnique(predicted);
  SortUnique(gold);
  if (predicted.empty() || gold.empty()) return 0.0;
  std::vector<std::string> common;
  std::set_intersection(predicted.begin(), predicted.end(), gold.begin(),
                        gold.end(), std::back_inserter(common));
  if (common.empty()) return 0.0;
  const double precision =
      static_cast<double>(common.size()) / static_cast<double>(predicted.size());
  const double recall =
      static_cast<double>(common.size()) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

double PrecisionAtOne(const QuestionOutcome &outcome) {
  if (!outcome.answered || outcome.predicted.empty()) return 0.0;
  const auto &first = outcome.predicted.front();
  return std::find(outcome.gold.begin(), outcome.gold.end(), first) !=
                 outcome.gold.end()
             ? 1.0
             : 0.0;
}

Aggregate AggregateF1(std::span<const QuestionOutcome> outcomes, F1Mode mode) {
  if (outcomes.empty()) throw Error("cannot aggregate zero questions");
  double sum = 0.0;
  size_t answered = 0;
  for (const auto &o : outcomes) {
    if (!o.answered) continue;
    ++answered;
    sum += ExampleF1(o.predicted, o.gold);
  }
  if (mode == F1Mode::kBerant) {
    return {sum / static_cast<double>(outcomes.size()), false};
  }
  if (answered == 0) return {0.0, true};
  return {sum / static_cast<double>(answered), false};
}

double MeanPrecisionAtOne(std::span<const QuestionOutcome> outcomes) {
  if (outcomes.empty()) throw Error("cannot aggregate zero questions");
  double sum = 0.0;
  for (const auto &o : outcomes) sum += PrecisionAtOne(o);
  return sum / static_cast<double>(outcomes.size());
}

MetricsReport ComputeMetrics(std::span<const QuestionOutcome> outcomes) {
  MetricsReport r;
  r.questions = outcomes.size();
  for (const auto &o : outcomes) r.answered += o.answered ? 1 : 0;
  r.precision_at_1 = MeanPrecisionAtOne(outcomes);
  r.f1_berant = AggregateF1(outcomes, F1Mode::kBerant).value;
  const Aggregate yao = AggregateF1(outcomes, F1Mode::kYao);
  r.f1_yao = yao.value;
  r.yao_undefined = yao.undefined;
  return r;
}

std::string FormatMetrics(const MetricsReport &report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "metric\tvalue(%)\n";
  out << "P@1\t" << 100.0 * report.precision_at_1 << '\n';
  out << "F1-berant\t" << 100.0 * report.f1_berant << '\n';
  out << "F1-yao\t" << 100.0 * report.f1_yao
      << (report.yao_undefined ? "\t(undefined: no answered question)" : "")
      << '\n';
  out << "questions\t" << report.questions << '\n';
  out << "answered\t" << report.answered << '\n';
  return out.str();
}

void WritePredictions(std::ostream &output,
                      std::span<const PredictionRecord> records) {
  output << std::setprecision(17);
  for (const auto &r : records) {
    output << r.question << '\t';
    for (size_t i = 0; i < r.entities.size(); ++i) {
      if (i > 0) output << ';';
      output << r.entities[i];
    }
    output << '\t';
    if (r.answered()) {
      output << r.score << '\t' << r.signature;
    } else {
      output << "-inf\tnone";
    }
    output << '\n';
  }
}

std::vector<PredictionRecord> ReadPredictions(std::istream &input) {
  std::vector<PredictionRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 tab-separated fields");
    }
    PredictionRecord r;
    r.question = std::string(fields[0]);
    if (!fields[1].empty()) {
      for (auto e : SplitFields(fields[1], ';')) {
        if (e.empty()) throw ParseError(line_no, "empty entity");
        r.entities.emplace_back(e);
      }
    }
    if (fields[2] == "-inf") {
      r.score = -std::numeric_limits<double>::infinity();
    } else {
      try {
        size_t used = 0;
        r.score = std::stod(std::string(fields[2]), &used);
        if (used != fields[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception &) {
        throw ParseError(line_no, "bad score '" + std::string(fields[2]) + "'");
      }
    }
    r.signature = std::string(fields[3]);
    if (!r.answered()) {
      r.score = -std::numeric_limits<double>::infinity();
      r.signature = "none";
    }
    records.push_back(std::move(r));
  }
  return records;
}

EnsembleResult EnsembleCombine(std::span<const PredictionRecord> own,
                               std::span<const PredictionRecord> other,
                               double fraction) {
  if (own.size() != other.size()) {
    throw Error("prediction lists differ in length: " +
                std::to_string(own.size()) + " vs " +
                std::to_string(other.size()));
  }
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ConfigError("ensemble fraction must lie in [0, 1]");
  }
  for (size_t i = 0; i < own.size(); ++i) {
    if (own[i].question != other[i].question) {
      throw Error("prediction lists are misaligned at question " +
                  std::to_string(i + 1));
    }
  }
  EnsembleResult result;
  const size_t n = own.size();
  // The threshold is the ceil(fraction * n)-th largest own score, i.e. the
  // (1 - fraction) quantile; using own where score >= threshold.
  const size_t wanted =
      static_cast<size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::vector<double> scores;
  for (const auto &r : own) scores.push_back(r.score);
  std::sort(scores.begin(), scores.end(), std::greater<>());
  result.threshold = wanted == 0 ? std::numeric_limits<double>::infinity()
                                 : scores[wanted - 1];
  size_t used = 0;
  for (size_t i = 0; i < n; ++i) {
    const bool take_own = own[i].answered()
                              ? own[i].score >= result.threshold
                              : wanted == n && n > 0;
    result.used_own.push_back(take_own);
    result.combined.push_back(take_own ? own[i] : other[i]);
    used += take_own ? 1 : 0;
  }
  result.realized_fraction =
      n == 0 ? 0.0 : static_cast<double>(used) / static_cast<double>(n);
  return result;
}

}  // namespace kbqa
