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

#include "kbqa/training.h"

#include <atomic>
#include <mutex>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "kbqa/error.h"

namespace kbqa {

namespace {

double LoadRelaxed(const double &x) {
  return std::atomic_ref<double>(const_cast<double &>(x))
      .load(std::memory_order_relaxed);
}

void StoreRelaxed(double &x, double v) {
  std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
}

void EmbedRelaxed(const EmbeddingMatrix &w, const SparseVector &v,
                  std::vector<double> &out) {
  std::fill(out.begin(), out.end(), 0.0);
  const size_t k = w.dim();
  for (const auto &[index, count] : v.entries()) {
    if (index >= w.columns()) {
      throw DimensionError("feature index " + std::to_string(index) +
                           " out of range for N = " +
                           std::to_string(w.columns()));
    }
    const double *c = w.data() + static_cast<size_t>(index) * k;
    for (size_t d = 0; d < k; ++d) out[d] += count * LoadRelaxed(c[d]);
  }
}

// Applies column -= lr * grad and projects the column onto the unit ball.
void UpdateColumn(EmbeddingMatrix &w, FeatureIndex index,
                  const std::vector<double> &grad, double lr) {
  const size_t k = w.dim();
  double *c = w.data() + static_cast<size_t>(index) * k;
  double norm2 = 0.0;
  for (size_t d = 0; d < k; ++d) {
    const double v = LoadRelaxed(c[d]) - lr * grad[d];
    StoreRelaxed(c[d], v);
    norm2 += v * v;
  }
  if (norm2 > 1.0) {
    const double scale = 1.0 / std::sqrt(norm2);
    for (size_t d = 0; d < k; ++d) StoreRelaxed(c[d], LoadRelaxed(c[d]) * scale);
  }
}

}  // namespace

const char *TaskName(Task task) {
  switch (task) {
    case Task::kQa:
      return "qa";
    case Task::kParaphrase:
      return "paraphrase";
    case Task::kName:
      return "name";
  }
  return "?";
}

void TrainConfig::Validate() const {
  if (dim == 0) throw ConfigError("k must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(margin > 0.0)) throw ConfigError("margin must be > 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (negatives_per_example < 1) {
    throw ConfigError("negatives per example must be >= 1");
  }
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  if (mix.qa < 0 || mix.paraphrase < 0 || mix.name < 0) {
    throw ConfigError("task mix ratios must be nonnegative");
  }
  if (mix.qa + mix.paraphrase + mix.name <= 0) {
    throw ConfigError("task mix ratios must not all be zero");
  }
}

double RankingStep(EmbeddingMatrix &w, const SparseVector &anchor,
                   const SparseVector &positive, const SparseVector &negative,
                   double learning_rate, double margin) {
  const size_t k = w.dim();
  std::vector<double> a(k), b(k), c(k);
  EmbedRelaxed(w, anchor, a);
  EmbedRelaxed(w, positive, b);
  EmbedRelaxed(w, negative, c);
  double loss = margin;
  for (size_t d = 0; d < k; ++d) loss += a[d] * (c[d] - b[d]);
  if (!(loss > 0.0)) return 0.0;

  // d loss / d w_i = x_i (c - b) - y_i a + z_i a, walking the three sorted
  // supports in merged index order.
  const auto &xs = anchor.entries();
  const auto &ys = positive.entries();
  const auto &zs = negative.entries();
  size_t ix = 0, iy = 0, iz = 0;
  std::vector<double> grad(k);
  constexpr FeatureIndex kEnd = ~FeatureIndex{0};
  while (ix < xs.size() || iy < ys.size() || iz < zs.size()) {
    const FeatureIndex fx = ix < xs.size() ? xs[ix].first : kEnd;
    const FeatureIndex fy = iy < ys.size() ? ys[iy].first : kEnd;
    const FeatureIndex fz = iz < zs.size() ? zs[iz].first : kEnd;
    const FeatureIndex index = std::min({fx, fy, fz});
    const double cx = fx == index ? xs[ix++].second : 0.0;
    const double cy = fy == index ? ys[iy++].second : 0.0;
    const double cz = fz == index ? zs[iz++].second : 0.0;
    for (size_t d = 0; d < k; ++d) {
      grad[d] = cx * (c[d] - b[d]) + (cz - cy) * a[d];
    }
    UpdateColumn(w, index, grad, learning_rate);
  }
  return loss;
}

double NameMappingStep(EmbeddingMatrix &w, const Dictionary &dict,
                       EntityId entity, const SparseVector &name,
                       EntityId negative_entity, double learning_rate,
                       double margin) {
  return RankingStep(w, name,
                     SparseVector::OneHot(dict.EntityIndex(entity, Role::kPath)),
                     SparseVector::OneHot(
                         dict.EntityIndex(negative_entity, Role::kPath)),
                     learning_rate, margin);
}

std::vector<AnswerPath> CandidatePaths(const KnowledgeGraph &graph,
                                       EntityId e) {
  std::vector<AnswerPath> paths = OneHopPaths(graph, e);
  std::vector<AnswerPath> two = TwoHopPaths(graph, e);
  paths.insert(paths.end(), two.begin(), two.end());
  return paths;
}

NegativeSample SampleNegative(const TrainingExample &example,
                              const KnowledgeGraph &graph,
                              std::span<const AnswerPath> candidates,
                              const AnswerFeaturizer &featurizer,
                              std::mt19937_64 &rng) {
  if (example.answers.empty()) throw Error("training example has no answer");
  const size_t n = graph.entity_count();
  if (n < 2) throw Error("negative sampling needs at least two entities");

  auto is_gold = [&](const AnswerPath &p) {
    for (const auto &gold : example.answers) {
      if (featurizer.Equivalent(p, gold)) return true;
    }
    return false;
  };

  std::bernoulli_distribution coin(0.5);
  if (coin(rng) && !candidates.empty()) {
    std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
    for (int attempt = 0; attempt < kMaxNegativeRetries; ++attempt) {
      const AnswerPath &p = candidates[pick(rng)];
      if (!is_gold(p)) return {p, true};
    }
  }

  std::uniform_int_distribution<size_t> pick_gold(0,
                                                  example.answers.size() - 1);
  const AnswerPath &base = example.answers[pick_gold(rng)];
  std::uniform_int_distribution<uint32_t> pick_entity(
      0, static_cast<uint32_t>(n - 2));
  AnswerPath replaced = base;
  for (int attempt = 0; attempt < kMaxNegativeRetries; ++attempt) {
    uint32_t x = pick_entity(rng);
    if (x >= base.end().value) ++x;
    replaced = base.WithEnd(EntityId{x});
    if (!is_gold(replaced)) break;
  }
  return {replaced, false};
}

std::string FormatEpochReport(const EpochReport &report) {
  std::ostringstream out;
  out << report.epoch << '\t' << TaskName(report.task) << '\t'
      << report.mean_loss << '\t' << report.steps;
  return out.str();
}

double TrainResult::EpochLoss(Task task, int epoch) const {
  int target = epoch;
  if (target == 0) {
    for (const auto &r : reports) target = std::max(target, r.epoch);
  }
  for (const auto &r : reports) {
    if (r.epoch == target && r.task == task) return r.mean_loss;
  }
  return 0.0;
}

namespace {

// Read-only state shared by all workers.
struct TrainingContext {
  const TrainingData *data = nullptr;
  const KnowledgeGraph *graph = nullptr;
  const Dictionary *dict = nullptr;
  const TrainConfig *config = nullptr;
  const AnswerFeaturizer *featurizer = nullptr;
  std::vector<SparseVector> positives;
  std::unordered_map<uint32_t, std::vector<AnswerPath>> candidates;
  // Paraphrase questions whose cluster has another member, and the members
  // of each cluster.
  std::vector<uint32_t> paraphrase_pool;
  std::unordered_map<uint32_t, std::vector<uint32_t>> clusters;
  size_t usable_clusters = 0;
  std::array<double, kTaskCount> weights{};
};

struct EpochCounters {
  std::array<std::atomic<double>, kTaskCount> loss{};
  std::array<std::atomic<uint64_t>, kTaskCount> steps{};
  std::atomic<uint64_t> skipped{0};
};

TrainingContext BuildContext(const TrainingData &data,
                             const KnowledgeGraph &graph,
                             const Dictionary &dict, const TrainConfig &config,
                             const AnswerFeaturizer &featurizer) {
  TrainingContext ctx;
  ctx.data = &data;
  ctx.graph = &graph;
  ctx.dict = &dict;
  ctx.config = &config;
  ctx.featurizer = &featurizer;
  ctx.positives.reserve(data.qa.size());
  for (const auto &ex : data.qa) {
    if (ex.answers.empty()) throw Error("training example has no answer");
    for (const auto &p : ex.answers) {
      if (p.start() != ex.entity) {
        throw Error("gold path does not start at the question entity");
      }
    }
    ctx.positives.push_back(featurizer.FeaturizeAll(ex.answers));
    if (!ctx.candidates.contains(ex.entity.value)) {
      ctx.candidates.emplace(ex.entity.value,
                             CandidatePaths(graph, ex.entity));
    }
  }
  for (uint32_t i = 0; i < data.paraphrases.size(); ++i) {
    ctx.clusters[data.paraphrases[i].cluster].push_back(i);
  }
  for (uint32_t i = 0; i < data.paraphrases.size(); ++i) {
    if (ctx.clusters[data.paraphrases[i].cluster].size() >= 2) {
      ctx.paraphrase_pool.push_back(i);
    }
  }
  for (const auto &[id, members] : ctx.clusters) {
    if (members.size() >= 2) ++ctx.usable_clusters;
  }
  ctx.weights[0] = data.qa.empty() ? 0.0 : config.mix.qa;
  ctx.weights[1] = data.paraphrases.empty() ? 0.0 : config.mix.paraphrase;
  ctx.weights[2] = data.names.empty() ? 0.0 : config.mix.name;
  return ctx;
}

void RunWorker(const TrainingContext &ctx, EmbeddingMatrix &w, size_t steps,
               std::mt19937_64 &rng, EpochCounters &counters) {
  const TrainConfig &cfg = *ctx.config;
  const TrainingData &data = *ctx.data;
  std::discrete_distribution<int> pick_task(ctx.weights.begin(),
                                            ctx.weights.end());
  std::uniform_int_distribution<size_t> pick_qa(0, data.qa.size() - 1);
  for (size_t step = 0; step < steps; ++step) {
    const int task = pick_task(rng);
    double loss = 0.0;
    switch (static_cast<Task>(task)) {
      case Task::kQa: {
        const size_t i = pick_qa(rng);
        const TrainingExample &ex = data.qa[i];
        const auto &pool = ctx.candidates.at(ex.entity.value);
        for (int n = 0; n < cfg.negatives_per_example; ++n) {
          NegativeSample neg =
              SampleNegative(ex, *ctx.graph, pool, *ctx.featurizer, rng);
          loss += HingeStep(w, ex.question, ctx.positives[i],
                            ctx.featurizer->Featurize(neg.path),
                            cfg.learning_rate, cfg.margin);
        }
        // Per-negative mean, comparable with MeanQaLoss.
        loss /= cfg.negatives_per_example;
        break;
      }
      case Task::kParaphrase: {
        if (ctx.usable_clusters < 1 || ctx.clusters.size() < 2) {
          counters.skipped.fetch_add(1, std::memory_order_relaxed);
          continue;
        }
        std::uniform_int_distribution<size_t> pick(
            0, ctx.paraphrase_pool.size() - 1);
        const auto &q1 = data.paraphrases[ctx.paraphrase_pool[pick(rng)]];
        const auto &members = ctx.clusters.at(q1.cluster);
        std::uniform_int_distribution<size_t> pick_member(0,
                                                          members.size() - 1);
        uint32_t j = members[pick_member(rng)];
        while (&data.paraphrases[j] == &q1) j = members[pick_member(rng)];
        std::uniform_int_distribution<size_t> pick_any(
            0, data.paraphrases.size() - 1);
        size_t neg = pick_any(rng);
        while (data.paraphrases[neg].cluster == q1.cluster) {
          neg = pick_any(rng);
        }
        loss = ParaphraseStep(w, q1.question, data.paraphrases[j].question,
                              data.paraphrases[neg].question,
                              cfg.learning_rate, cfg.margin);
        break;
      }
      case Task::kName: {
        std::uniform_int_distribution<size_t> pick(0, data.names.size() - 1);
        const NameExample &ex = data.names[pick(rng)];
        const uint32_t n = static_cast<uint32_t>(ctx.graph->entity_count());
        if (n < 2) continue;
        std::uniform_int_distribution<uint32_t> pick_entity(0, n - 2);
        uint32_t neg = pick_entity(rng);
        if (neg >= ex.entity.value) ++neg;
        loss = NameMappingStep(w, *ctx.dict, ex.entity, ex.name,
                               EntityId{neg}, cfg.learning_rate, cfg.margin);
        break;
      }
    }
    counters.loss[task].fetch_add(loss, std::memory_order_relaxed);
    counters.steps[task].fetch_add(1, std::memory_order_relaxed);
  }
}

}  // namespace

TrainResult TrainMultitask(const TrainingData &data,
                           const KnowledgeGraph &graph, const Dictionary &dict,
                           const TrainConfig &config,
                           const EpochCallback &on_epoch_end) {
  config.Validate();
  if (data.qa.empty()) throw Error("QA training set is empty");
  dict.CheckCompatible(graph);

  AnswerFeaturizer featurizer(graph, dict, config.representation,
                              config.subgraph_cap);
  TrainingContext ctx = BuildContext(data, graph, dict, config, featurizer);

  const double total = ctx.weights[0] + ctx.weights[1] + ctx.weights[2];
  if (total <= 0) throw ConfigError("no task with data has a nonzero ratio");
  size_t steps_per_epoch = config.steps_per_epoch;
  if (steps_per_epoch == 0) {
    if (ctx.weights[0] > 0) {
      steps_per_epoch = static_cast<size_t>(std::ceil(
          static_cast<double>(data.qa.size()) * total / ctx.weights[0]));
    } else {
      steps_per_epoch = data.paraphrases.size() + data.names.size();
    }
  }

  TrainResult result{
      EmbeddingMatrix::RandomInit(config.dim, dict.size(), config.seed),
      {},
      {},
      0};
  EmbeddingMatrix &w = result.weights;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochCounters counters;
    const size_t workers = static_cast<size_t>(config.workers);
    std::vector<std::mt19937_64> rngs;
    for (size_t i = 0; i < workers; ++i) {
      std::seed_seq seq{config.seed, static_cast<uint64_t>(epoch),
                        static_cast<uint64_t>(i)};
      rngs.emplace_back(seq);
    }
    auto share = [&](size_t i) {
      return steps_per_epoch / workers + (i < steps_per_epoch % workers);
    };
    if (workers == 1) {
      RunWorker(ctx, w, steps_per_epoch, rngs[0], counters);
    } else {
      std::vector<std::jthread> threads;
      std::exception_ptr failure;
      std::mutex failure_mu;
      for (size_t i = 0; i < workers; ++i) {
        threads.emplace_back([&, i] {
          try {
            RunWorker(ctx, w, share(i), rngs[i], counters);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        });
      }
      threads.clear();
      if (failure) std::rethrow_exception(failure);
    }
    w.ProjectAll();

    for (size_t t = 0; t < kTaskCount; ++t) {
      const uint64_t steps = counters.steps[t].load();
      result.task_steps[t] += steps;
      if (ctx.weights[t] <= 0 && steps == 0) continue;
      result.reports.push_back(
          {epoch, static_cast<Task>(t),
           steps > 0 ? counters.loss[t].load() / static_cast<double>(steps)
                     : 0.0,
           steps});
    }
    result.skipped_paraphrase_steps += counters.skipped.load();
    if (on_epoch_end) on_epoch_end(epoch, w);
  }
  return result;
}

double MeanQaLoss(const EmbeddingMatrix &w, const TrainingData &data,
                  const KnowledgeGraph &graph, const Dictionary &dict,
                  const TrainConfig &config, uint64_t seed,
                  int negatives_per_example) {
  if (data.qa.empty()) throw Error("QA set is empty");
  AnswerFeaturizer featurizer(graph, dict, config.representation,
                              config.subgraph_cap);
  std::mt19937_64 rng(seed);
  std::unordered_map<uint32_t, std::vector<AnswerPath>> candidates;
  double total = 0.0;
  for (const auto &ex : data.qa) {
    auto it = candidates.find(ex.entity.value);
    if (it == candidates.end()) {
      it = candidates.emplace(ex.entity.value, CandidatePaths(graph, ex.entity))
               .first;
    }
    const std::vector<double> q = Embed(w, ex.question);
    const double positive = Dot(q, Embed(w, featurizer.FeaturizeAll(ex.answers)));
    for (int n = 0; n < negatives_per_example; ++n) {
      NegativeSample neg = SampleNegative(ex, graph, it->second, featurizer, rng);
      const double negative = Dot(q, Embed(w, featurizer.Featurize(neg.path)));
      total += std::max(0.0, config.margin - positive + negative);
    }
  }
  return total / static_cast<double>(data.qa.size() * negatives_per_example);
}

}  // namespace kbqa
