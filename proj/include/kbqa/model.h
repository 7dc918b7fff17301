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

#ifndef KBQA_MODEL_H_
#define KBQA_MODEL_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kbqa/dictionary.h"
#include "kbqa/features.h"

namespace kbqa {

// Tolerance on the unit-ball constraint ||w_i|| <= 1.
inline constexpr double kUnitBallTolerance = 1e-6;

// k x N embedding matrix stored column-major: column i (the embedding of
// dictionary entry i) occupies data()[i*k, (i+1)*k).
class EmbeddingMatrix {
 public:
  // Zero matrix. Throws ConfigError if dim == 0.
  EmbeddingMatrix(size_t dim, size_t columns, uint64_t seed = 0);

  // Entries i.i.d. uniform in [-1/sqrt(k), 1/sqrt(k)], then projected onto
  // the unit ball.
  static EmbeddingMatrix RandomInit(size_t dim, size_t columns, uint64_t seed);

  size_t dim() const { return dim_; }
  size_t columns() const { return columns_; }
  uint64_t seed() const { return seed_; }

  std::span<double> column(size_t i) {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> column(size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }

  // Rescales column i to unit norm if its norm exceeds 1.
  void ProjectColumn(size_t i);
  void ProjectAll();
  double ColumnNorm(size_t i) const;
  double MaxColumnNorm() const;

  bool operator==(const EmbeddingMatrix &other) const = default;

  // Binary model file, little-endian:
  //   bytes 0-7   magic "KBQAEMB1"
  //   bytes 8-15  uint64 k
  //   bytes 16-23 uint64 N
  //   bytes 24-31 uint64 seed
  //   then N*k IEEE-754 float64 values, column by column.
  void Save(std::ostream &output) const;
  static EmbeddingMatrix Load(std::istream &input);

 private:
  size_t dim_;
  size_t columns_;
  uint64_t seed_;
  std::vector<double> data_;
};

// f(v) = W v. Throws DimensionError if an index is out of range.
std::vector<double> Embed(const EmbeddingMatrix &w, const SparseVector &v);
void EmbedInto(const EmbeddingMatrix &w, const SparseVector &v,
               std::span<double> out);

double Dot(std::span<const double> a, std::span<const double> b);

// S(q, a) = f(q)^T g(a).
double Score(const EmbeddingMatrix &w, const SparseVector &question,
             const SparseVector &answer);

// S_prp(q1, q2) = f(q1)^T f(q2).
double ScoreParaphrase(const EmbeddingMatrix &w, const SparseVector &q1,
                       const SparseVector &q2);

// Writes `path` (binary matrix) and `path + ".dict"` (dictionary manifest).
void SaveModel(const std::string &path, const EmbeddingMatrix &w,
               const Dictionary &dict);

struct LoadedModel {
  EmbeddingMatrix weights;
  Dictionary dictionary;
};

// Loads both files written by SaveModel and checks that N agrees.
LoadedModel LoadModel(const std::string &path);

}  // namespace kbqa

#endif  // KBQA_MODEL_H_
