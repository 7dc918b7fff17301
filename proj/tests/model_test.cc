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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "kbqa/dictionary.h"
#include "kbqa/error.h"
#include "kbqa/features.h"
#include "kbqa/model.h"
#include "test_util.h"

namespace kbqa {
namespace {

SparseVector RandomSparse(std::mt19937_64 &rng, size_t n, int nnz) {
  std::vector<SparseVector::Entry> e;
  for (int i = 0; i < nnz; ++i) {
    e.emplace_back(static_cast<FeatureIndex>(rng() % n), 1 + rng() % 3);
  }
  return SparseVector::FromEntries(std::move(e));
}

// Dense k x N matrix times a dense copy of v.
std::vector<double> DenseProduct(const EmbeddingMatrix &w,
                                 const SparseVector &v) {
  const size_t k = w.dim(), n = w.columns();
  std::vector<std::vector<double>> m(k, std::vector<double>(n));
  for (size_t col = 0; col < n; ++col) {
    for (size_t row = 0; row < k; ++row) m[row][col] = w.data()[col * k + row];
  }
  std::vector<double> x(n, 0.0);
  for (const auto &[i, c] : v.entries()) x[i] = c;
  std::vector<double> y(k, 0.0);
  for (size_t row = 0; row < k; ++row) {
    for (size_t col = 0; col < n; ++col) y[row] += m[row][col] * x[col];
  }
  return y;
}

TEST_CASE("embed matches a dense product") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    size_t k = 1 + rng() % 8, n = 1 + rng() % 50;
    EmbeddingMatrix w = EmbeddingMatrix::RandomInit(k, n, rng());
    SparseVector v = RandomSparse(rng, n, 1 + rng() % 6);
    std::vector<double> got = Embed(w, v), want = DenseProduct(w, v);
    REQUIRE(got.size() == k);
    for (size_t i = 0; i < k; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  }
}

TEST_CASE("embed basics") {
  EmbeddingMatrix w = EmbeddingMatrix::RandomInit(4, 6, 1);
  CHECK(Embed(w, {}) == std::vector<double>(4, 0.0));
  auto col = w.column(2);
  CHECK(Embed(w, SparseVector::OneHot(2)) ==
        std::vector<double>(col.begin(), col.end()));
  std::vector<double> twice = Embed(w, SparseVector::OneHot(0, 2.0));
  for (size_t i = 0; i < 4; ++i) CHECK(twice[i] == 2 * w.column(0)[i]);
  CHECK_THROWS_AS(Embed(w, SparseVector::OneHot(6)), DimensionError);
  CHECK_THROWS_AS(EmbeddingMatrix(0, 3), ConfigError);
}

TEST_CASE("initialization is bounded and seeded") {
  EmbeddingMatrix a = EmbeddingMatrix::RandomInit(16, 40, 5);
  EmbeddingMatrix b = EmbeddingMatrix::RandomInit(16, 40, 5);
  EmbeddingMatrix c = EmbeddingMatrix::RandomInit(16, 40, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.MaxColumnNorm() <= 1 + kUnitBallTolerance);
  for (size_t i = 0; i < 16 * 40; ++i) {
    CHECK(std::abs(a.data()[i]) <= 1 / std::sqrt(16.0) + 1e-15);
  }
}

TEST_CASE("projection rescales only long columns") {
  EmbeddingMatrix w(2, 2);
  w.column(0)[0] = 3;
  w.column(0)[1] = 4;
  w.column(1)[0] = 0.3;
  w.ProjectAll();
  CHECK(w.column(0)[0] == doctest::Approx(0.6));
  CHECK(w.column(0)[1] == doctest::Approx(0.8));
  CHECK(w.column(1)[0] == 0.3);
  CHECK(w.ColumnNorm(0) == doctest::Approx(1.0));
}

TEST_CASE("score examples") {
  EmbeddingMatrix w(2, 2);
  w.column(0)[0] = 1;
  w.column(1)[0] = 0.5;
  w.column(1)[1] = 0.5;
  CHECK(Score(w, SparseVector::OneHot(0), SparseVector::OneHot(1)) == 0.5);

  EmbeddingMatrix zero(3, 5);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    CHECK(Score(zero, RandomSparse(rng, 5, 3), RandomSparse(rng, 5, 3)) == 0);
  }

  EmbeddingMatrix ortho(2, 2);
  ortho.column(0)[0] = 1;
  ortho.column(1)[1] = 1;
  CHECK(Score(ortho, SparseVector::OneHot(0), SparseVector::OneHot(1)) == 0);
}

TEST_CASE("paraphrase score is a symmetric dot product") {
  std::mt19937_64 rng(4);
  EmbeddingMatrix w = EmbeddingMatrix::RandomInit(8, 20, 3);
  for (int i = 0; i < 50; ++i) {
    SparseVector a = RandomSparse(rng, 20, 4), b = RandomSparse(rng, 20, 4);
    CHECK(ScoreParaphrase(w, a, b) == ScoreParaphrase(w, b, a));
    std::vector<double> fa = Embed(w, a);
    CHECK(ScoreParaphrase(w, a, a) ==
          doctest::Approx(Dot(fa, fa)).epsilon(1e-12));
    CHECK(ScoreParaphrase(w, a, a) >= 0);
    CHECK(ScoreParaphrase(w, a, {}) == 0);
  }
}

TEST_CASE("score is linear in scaled counts") {
  std::mt19937_64 rng(9);
  EmbeddingMatrix w = EmbeddingMatrix::RandomInit(6, 30, 2);
  for (int i = 0; i < 50; ++i) {
    SparseVector q = RandomSparse(rng, 30, 4), a = RandomSparse(rng, 30, 4);
    double alpha = 0.25 + (rng() % 16) * 0.25;
    CHECK(Score(w, q.Scaled(alpha), a) ==
          doctest::Approx(alpha * Score(w, q, a)).epsilon(1e-12));
  }
}

TEST_CASE("model stream round trip is bit identical") {
  std::mt19937_64 rng(12);
  EmbeddingMatrix w = EmbeddingMatrix::RandomInit(5, 17, 77);
  std::stringstream io;
  w.Save(io);
  std::string bytes = io.str();
  REQUIRE(bytes.size() == 32 + 5 * 17 * 8);
  CHECK(bytes.substr(0, 8) == "KBQAEMB1");
  uint64_t k = 0, n = 0, seed = 0;
  std::memcpy(&k, bytes.data() + 8, 8);
  std::memcpy(&n, bytes.data() + 16, 8);
  std::memcpy(&seed, bytes.data() + 24, 8);
  CHECK(k == 5);
  CHECK(n == 17);
  CHECK(seed == 77);
  double first = 0;
  std::memcpy(&first, bytes.data() + 32, 8);
  CHECK(first == w.column(0)[0]);

  EmbeddingMatrix v = EmbeddingMatrix::Load(io);
  CHECK(v == w);
  for (int i = 0; i < 100; ++i) {
    SparseVector q = RandomSparse(rng, 17, 3), a = RandomSparse(rng, 17, 3);
    CHECK(Score(v, q, a) == Score(w, q, a));
  }
}

TEST_CASE("corrupt model files are rejected") {
  EmbeddingMatrix w = EmbeddingMatrix::RandomInit(3, 4, 1);
  std::stringstream io;
  w.Save(io);
  std::string bytes = io.str();
  auto load = [](const std::string &b) {
    std::istringstream in(b);
    return EmbeddingMatrix::Load(in);
  };
  CHECK_THROWS_AS(load(bytes.substr(0, 20)), Error);
  CHECK_THROWS_AS(load(bytes.substr(0, bytes.size() - 1)), Error);
  CHECK_THROWS_AS(load(bytes + "x"), Error);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(load(bad), Error);
}

TEST_CASE("model files pair with their dictionary") {
  namespace fs = std::filesystem;
  KnowledgeGraph g = testing::FixtureKb();
  Dictionary d = Dictionary::Build(g, {"who", "born"});
  EmbeddingMatrix w = EmbeddingMatrix::RandomInit(4, d.size(), 3);
  fs::path dir = fs::temp_directory_path() / "kbqa_model_test";
  fs::create_directories(dir);
  std::string path = (dir / "m.bin").string();
  SaveModel(path, w, d);
  CHECK(fs::exists(path + ".dict"));
  LoadedModel m = LoadModel(path);
  CHECK(m.weights == w);
  CHECK(m.dictionary.size() == d.size());

  // A dictionary with a different N is a dimension error.
  Dictionary small = Dictionary::Build(g, {"who"});
  small.SaveFile(path + ".dict");
  CHECK_THROWS_AS(LoadModel(path), DimensionError);
  EmbeddingMatrix wrong(4, d.size() + 1);
  CHECK_THROWS_AS(SaveModel(path, wrong, d), DimensionError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace kbqa
