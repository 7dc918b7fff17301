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

#include "kbqa/model.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "kbqa/error.h"

namespace kbqa {

namespace {

constexpr char kMagic[8] = {'K', 'B', 'Q', 'A', 'E', 'M', 'B', '1'};

static_assert(std::endian::native == std::endian::little,
              "model I/O assumes a little-endian host");

void WriteU64(std::ostream &out, uint64_t v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

uint64_t ReadU64(std::istream &in) {
  uint64_t v = 0;
  if (!in.read(reinterpret_cast<char *>(&v), sizeof(v))) {
    throw Error("model file truncated in header");
  }
  return v;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(size_t dim, size_t columns, uint64_t seed)
    : dim_(dim), columns_(columns), seed_(seed) {
  if (dim == 0) throw ConfigError("embedding dimension must be at least 1");
  data_.assign(dim * columns, 0.0);
}

EmbeddingMatrix EmbeddingMatrix::RandomInit(size_t dim, size_t columns,
                                            uint64_t seed) {
  EmbeddingMatrix w(dim, columns, seed);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (double &x : w.data_) x = uniform(rng);
  w.ProjectAll();
  return w;
}

double EmbeddingMatrix::ColumnNorm(size_t i) const {
  auto c = column(i);
  return std::sqrt(Dot(c, c));
}

void EmbeddingMatrix::ProjectColumn(size_t i) {
  const double norm = ColumnNorm(i);
  if (norm > 1.0) {
    for (double &x : column(i)) x /= norm;
  }
}

void EmbeddingMatrix::ProjectAll() {
  for (size_t i = 0; i < columns_; ++i) ProjectColumn(i);
}

double EmbeddingMatrix::MaxColumnNorm() const {
  double max = 0.0;
  for (size_t i = 0; i < columns_; ++i) max = std::max(max, ColumnNorm(i));
  return max;
}

void EmbeddingMatrix::Save(std::ostream &output) const {
  output.write(kMagic, sizeof(kMagic));
  WriteU64(output, dim_);
  WriteU64(output, columns_);
  WriteU64(output, seed_);
  output.write(reinterpret_cast<const char *>(data_.data()),
               static_cast<std::streamsize>(data_.size() * sizeof(double)));
  if (!output) throw Error("failed writing model");
}

EmbeddingMatrix EmbeddingMatrix::Load(std::istream &input) {
  char magic[sizeof(kMagic)];
  if (!input.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a model file (bad magic)");
  }
  const uint64_t dim = ReadU64(input);
  const uint64_t columns = ReadU64(input);
  const uint64_t seed = ReadU64(input);
  if (dim == 0) throw Error("model file has k = 0");
  if (columns != 0 && dim > (uint64_t{1} << 40) / columns) {
    throw Error("model file dimensions are implausible");
  }
  EmbeddingMatrix w(dim, columns, seed);
  const auto bytes =
      static_cast<std::streamsize>(w.data_.size() * sizeof(double));
  if (!input.read(reinterpret_cast<char *>(w.data_.data()), bytes)) {
    throw Error("model file truncated in column data");
  }
  if (input.peek() != std::char_traits<char>::eof()) {
    throw Error("model file has trailing bytes");
  }
  return w;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void EmbedInto(const EmbeddingMatrix &w, const SparseVector &v,
               std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto &[index, count] : v.entries()) {
    if (index >= w.columns()) {
      throw DimensionError("feature index " + std::to_string(index) +
                           " out of range for N = " +
                           std::to_string(w.columns()));
    }
    auto c = w.column(index);
    for (size_t d = 0; d < out.size(); ++d) out[d] += count * c[d];
  }
}

std::vector<double> Embed(const EmbeddingMatrix &w, const SparseVector &v) {
  std::vector<double> out(w.dim());
  EmbedInto(w, v, out);
  return out;
}

double Score(const EmbeddingMatrix &w, const SparseVector &question,
             const SparseVector &answer) {
  return Dot(Embed(w, question), Embed(w, answer));
}

double ScoreParaphrase(const EmbeddingMatrix &w, const SparseVector &q1,
                       const SparseVector &q2) {
  return Dot(Embed(w, q1), Embed(w, q2));
}

void SaveModel(const std::string &path, const EmbeddingMatrix &w,
               const Dictionary &dict) {
  if (dict.size() != w.columns()) {
    throw DimensionError("model has N = " + std::to_string(w.columns()) +
                         " but dictionary has " + std::to_string(dict.size()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model " + path);
  w.Save(out);
  dict.SaveFile(path + ".dict");
}

LoadedModel LoadModel(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path);
  EmbeddingMatrix w = EmbeddingMatrix::Load(in);
  Dictionary dict = Dictionary::LoadFile(path + ".dict");
  if (dict.size() != w.columns()) {
    throw DimensionError("model has N = " + std::to_string(w.columns()) +
                         " but dictionary has " + std::to_string(dict.size()));
  }
  return {std::move(w), std::move(dict)};
}

}  // namespace kbqa
