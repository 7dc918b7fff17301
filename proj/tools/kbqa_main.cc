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

// Command-line driver: build-kb, generate, questions, train, evaluate, ask,
// ensemble.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kbqa/datagen.h"
#include "kbqa/dictionary.h"
#include "kbqa/error.h"
#include "kbqa/eval.h"
#include "kbqa/features.h"
#include "kbqa/inference.h"
#include "kbqa/kb_store.h"
#include "kbqa/model.h"
#include "kbqa/text.h"
#include "kbqa/training.h"

namespace kbqa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Thrown for flag combinations CLI11 cannot check by itself.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr char kKbFile[] = "kb.tsv";
constexpr char kSymbolFile[] = "symbols.tsv";
constexpr char kKbMeta[] = "kb.json";

json ReadJson(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw Error(path + ": " + e.what());
  }
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

// A KB argument is either a directory written by build-kb or a triple file.
KnowledgeGraph LoadKb(const std::string &arg, bool inverse_flag) {
  GraphOptions options;
  options.inverse_relations = inverse_flag;
  std::string file = arg;
  if (fs::is_directory(arg)) {
    file = (fs::path(arg) / kKbFile).string();
    const fs::path meta = fs::path(arg) / kKbMeta;
    if (fs::exists(meta)) {
      options.inverse_relations =
          inverse_flag || ReadJson(meta.string()).value("inverse_relations", false);
    }
  }
  return KnowledgeGraph::LoadFile(file, options);
}

// Settings stored next to a model so that evaluation featurizes answers the
// way training did.
struct ModelMeta {
  Representation representation = Representation::kSubgraph;
  size_t subgraph_cap = kDefaultSubgraphCap;
};

void WriteModelMeta(const std::string &model, const ModelMeta &meta,
                    const TrainConfig &config) {
  json doc = {{"representation", RepresentationName(meta.representation)},
              {"subgraph_cap", meta.subgraph_cap},
              {"k", config.dim},
              {"learning_rate", config.learning_rate},
              {"margin", config.margin},
              {"epochs", config.epochs},
              {"negatives_per_example", config.negatives_per_example},
              {"workers", config.workers},
              {"seed", config.seed}};
  WriteText(model + ".json", doc.dump(2) + "\n");
}

ModelMeta ReadModelMeta(const std::string &model) {
  ModelMeta meta;
  if (!fs::exists(model + ".json")) return meta;
  json doc = ReadJson(model + ".json");
  meta.representation =
      ParseRepresentation(doc.value("representation", "subgraph"));
  meta.subgraph_cap = doc.value("subgraph_cap", kDefaultSubgraphCap);
  return meta;
}

TaskMix ParseMix(const std::string &text) {
  std::vector<double> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ':')) {
    try {
      size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw UsageError("--mix expects qa:paraphrase:name, got '" + text + "'");
    }
  }
  if (parts.size() != 3) {
    throw UsageError("--mix expects qa:paraphrase:name, got '" + text + "'");
  }
  return {parts[0], parts[1], parts[2]};
}

QuestionOutcome Outcome(const KnowledgeGraph &g, const Prediction &p,
                        const QaRecord &record) {
  QuestionOutcome o{p.answered, {}, GoldEntities(g, record)};
  for (EntityId e : p.entities) o.predicted.push_back(g.entity_name(e));
  return o;
}

struct EvalRun {
  MetricsReport metrics;
  std::vector<PredictionRecord> predictions;
};

EvalRun RunEvaluation(const KnowledgeGraph &g, const Predictor &predictor,
                      const std::vector<QaRecord> &records) {
  EvalRun run;
  std::vector<QuestionOutcome> outcomes;
  for (const QaRecord &r : records) {
    Prediction p = predictor.Predict(Tokenize(r.question));
    outcomes.push_back(Outcome(g, p, r));
    PredictionRecord rec;
    rec.question = r.question;
    rec.entities = outcomes.back().predicted;
    if (p.answered) {
      rec.score = p.score;
      rec.signature = predictor.FormatSignature(p.signature);
    } else {
      rec.score = -std::numeric_limits<double>::infinity();
      rec.signature = "none";
    }
    run.predictions.push_back(std::move(rec));
  }
  run.metrics = ComputeMetrics(outcomes);
  return run;
}

void PrintMetrics(const MetricsReport &m) {
  std::cout << m.answered << " of " << m.questions << " questions answered\n"
            << FormatMetrics(m);
}

QaLoadResult LoadQa(const std::string &path, const KnowledgeGraph &g) {
  QaLoadResult r = LoadQaFile(path, g);
  if (r.rejected > 0) {
    std::cerr << path << ": skipped " << r.rejected << " line(s)";
    if (!r.rejections.empty()) std::cerr << ", first: " << r.rejections[0];
    std::cerr << "\n";
  }
  return r;
}

// build-kb

struct BuildKbArgs {
  std::string triples;
  std::string out;
  bool inverse = false;
};

int BuildKb(const BuildKbArgs &a) {
  GraphOptions options;
  options.inverse_relations = a.inverse;
  KnowledgeGraph g = KnowledgeGraph::LoadFile(a.triples, options);
  fs::create_directories(a.out);
  std::ostringstream kb;
  g.Write(kb);
  WriteText((fs::path(a.out) / kKbFile).string(), kb.str());
  // Reload the canonical file so that the manifest ids match what later
  // commands will see.
  KnowledgeGraph canonical = LoadKb(a.out, a.inverse);
  WriteText((fs::path(a.out) / kKbMeta).string(),
            json{{"inverse_relations", a.inverse}}.dump() + "\n");
  Dictionary::Build(canonical, {})
      .SaveFile((fs::path(a.out) / kSymbolFile).string());
  std::cout << canonical.entity_count() << " entities, "
            << canonical.base_relation_count() << " relations, "
            << canonical.triple_count() << " triples\n";
  return kExitOk;
}

// generate

struct GenerateArgs {
  ToyWorldConfig world;
  std::string templates;
  std::string out;
};

int Generate(GenerateArgs a) {
  if (!a.templates.empty()) a.world.templates = LoadTemplateSet(a.templates);
  ToyWorld w = MakeToyWorld(a.world);
  fs::create_directories(a.out);
  auto path = [&](const char *name) { return (fs::path(a.out) / name).string(); };
  std::ostringstream kb;
  w.graph.Write(kb);
  WriteText(path("triples.tsv"), kb.str());
  // Datasets name their entities, so they stay valid for the reloaded file.
  for (auto [name, split] : {std::pair{"train.tsv", &w.train},
                             std::pair{"valid.tsv", &w.valid},
                             std::pair{"test.tsv", &w.test}}) {
    std::ostringstream out;
    WriteQaDataset(out, w.graph, *split);
    WriteText(path(name), out.str());
  }
  std::ostringstream para;
  WriteParaphrases(para, w.paraphrases);
  WriteText(path("paraphrases.tsv"), para.str());
  std::cout << w.graph.entity_count() << " entities, "
            << w.graph.base_relation_count() << " relations, "
            << w.graph.triple_count() << " triples; " << w.train.size()
            << " train, " << w.valid.size() << " valid, " << w.test.size()
            << " test questions, " << w.paraphrases.size()
            << " paraphrases\n";
  return kExitOk;
}

// questions

struct QuestionsArgs {
  std::string kb;
  std::string templates;
  std::string out;
  bool inverse = false;
};

int Questions(const QuestionsArgs &a) {
  KnowledgeGraph g = LoadKb(a.kb, a.inverse);
  TemplateSet t =
      a.templates.empty() ? DefaultTemplates() : LoadTemplateSet(a.templates);
  std::vector<QaRecord> records = TriplesToQuestions(g, t.triple);
  std::ostringstream out;
  WriteQaDataset(out, g, records);
  if (a.out.empty()) {
    std::cout << out.str();
  } else {
    WriteText(a.out, out.str());
    std::cerr << records.size() << " questions\n";
  }
  return kExitOk;
}

// train

struct TrainArgs {
  std::string kb;
  std::string qa;
  std::string paraphrases;
  bool names = false;
  bool inverse = false;
  std::string rep = "subgraph";
  std::string strategy = "c2";
  std::string mix = "1:1:1";
  std::string out;
  TrainConfig config;
};

int Train(TrainArgs a) {
  KnowledgeGraph g = LoadKb(a.kb, a.inverse);
  QaLoadResult qa = LoadQa(a.qa, g);
  if (qa.records.empty()) throw Error(a.qa + ": no usable QA examples");
  std::vector<ParaphraseRecord> para;
  if (!a.paraphrases.empty()) para = LoadParaphraseFile(a.paraphrases);

  a.config.representation = ParseRepresentation(a.rep);
  a.config.mix = ParseMix(a.mix);
  const Strategy strategy = ParseStrategy(a.strategy);
  a.config.Validate();

  Dictionary dict =
      Dictionary::Build(g, CollectVocabulary(g, qa.records, para));
  TrainingData data = MakeTrainingData(g, dict, qa.records, para, a.names);

  std::ofstream log(a.out + ".log");
  if (!log) throw Error("cannot write " + a.out + ".log");
  TrainResult result = TrainMultitask(data, g, dict, a.config);
  for (const EpochReport &r : result.reports) {
    log << FormatEpochReport(r) << "\n";
  }
  if (result.skipped_paraphrase_steps > 0) {
    std::cerr << "skipped " << result.skipped_paraphrase_steps
              << " paraphrase steps: fewer than two usable clusters\n";
  }

  SaveModel(a.out, result.weights, dict);
  WriteModelMeta(a.out, {a.config.representation, a.config.subgraph_cap},
                 a.config);
  std::cout << "dictionary " << dict.size() << " columns, final qa loss "
            << result.EpochLoss(Task::kQa) << "\n";

  Predictor predictor(result.weights, dict, g,
                      {.strategy = strategy,
                       .representation = a.config.representation,
                       .subgraph_cap = a.config.subgraph_cap});
  std::cout << "training set, strategy " << StrategyName(strategy) << ":\n";
  PrintMetrics(RunEvaluation(g, predictor, qa.records).metrics);
  return kExitOk;
}

// evaluate / ask

struct PredictArgs {
  std::string kb;
  std::string model;
  std::string strategy = "c2";
  std::string rep;
  bool no_group = false;
  bool inverse = false;
  size_t top_relations = kDefaultTopRelations;
  double one_hop_weight = kDefaultOneHopWeight;
  // evaluate
  std::string qa;
  std::string predictions;
  // ask
  std::vector<std::string> question;
};

struct LoadedPredictor {
  KnowledgeGraph graph;
  LoadedModel model;
  InferenceOptions options;
};

LoadedPredictor LoadForPrediction(const PredictArgs &a) {
  LoadedPredictor p{LoadKb(a.kb, a.inverse), LoadModel(a.model), {}};
  p.model.dictionary.CheckCompatible(p.graph);
  ModelMeta meta = ReadModelMeta(a.model);
  p.options.strategy = ParseStrategy(a.strategy);
  p.options.representation =
      a.rep.empty() ? meta.representation : ParseRepresentation(a.rep);
  p.options.subgraph_cap = meta.subgraph_cap;
  p.options.group = !a.no_group;
  p.options.top_relations = a.top_relations;
  p.options.one_hop_weight = a.one_hop_weight;
  return p;
}

int Evaluate(const PredictArgs &a) {
  LoadedPredictor lp = LoadForPrediction(a);
  QaLoadResult qa = LoadQa(a.qa, lp.graph);
  if (qa.records.empty()) throw Error(a.qa + ": no usable QA examples");
  Predictor predictor(lp.model.weights, lp.model.dictionary, lp.graph,
                      lp.options);
  EvalRun run = RunEvaluation(lp.graph, predictor, qa.records);
  if (!a.predictions.empty()) {
    std::ofstream out(a.predictions);
    WritePredictions(out, run.predictions);
    if (!out) throw Error("cannot write " + a.predictions);
  }
  PrintMetrics(run.metrics);
  return kExitOk;
}

int Ask(const PredictArgs &a) {
  LoadedPredictor lp = LoadForPrediction(a);
  std::string text;
  for (const auto &w : a.question) text += (text.empty() ? "" : " ") + w;
  std::vector<std::string> words = Tokenize(text);
  std::optional<EntityId> entity = ResolveEntity(lp.graph, words);
  if (!entity) {
    std::cerr << "no entity recognized\n";
    return kExitData;
  }
  Predictor predictor(lp.model.weights, lp.model.dictionary, lp.graph,
                      lp.options);
  Prediction p = predictor.PredictForEntity(
      FeaturizeQuestion(lp.model.dictionary, words), *entity);
  if (!p.answered) {
    std::cout << "entity " << lp.graph.entity_name(*entity)
              << ": no candidate answers\n";
    return kExitOk;
  }
  std::string names;
  for (EntityId e : p.entities) {
    names += (names.empty() ? "" : ";") + lp.graph.entity_name(e);
  }
  std::cout << "answer\t" << names << "\nscore\t" << p.score << "\npath\t"
            << predictor.FormatSignature(p.signature) << "\n";
  return kExitOk;
}

// ensemble

struct EnsembleArgs {
  std::string own;
  std::string other;
  double fraction = 0.5;
  std::string out;
};

std::vector<PredictionRecord> ReadPredictionFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return ReadPredictions(in);
}

int Ensemble(const EnsembleArgs &a) {
  auto own = ReadPredictionFile(a.own);
  auto other = ReadPredictionFile(a.other);
  EnsembleResult r = EnsembleCombine(own, other, a.fraction);
  std::ostringstream out;
  WritePredictions(out, r.combined);
  if (a.out.empty()) {
    std::cout << out.str();
  } else {
    WriteText(a.out, out.str());
  }
  std::cerr << "threshold " << r.threshold << ", own predictions used for "
            << r.realized_fraction << " of questions\n";
  return kExitOk;
}

int Main(int argc, char **argv) {
  CLI::App app{"Question answering over a knowledge base with subgraph "
               "embeddings."};
  app.set_config("--config", "", "INI or TOML file with option defaults");
  app.require_subcommand(1);

  BuildKbArgs build;
  auto *build_cmd = app.add_subcommand(
      "build-kb", "Load and validate triples, write the indexed KB directory");
  build_cmd->add_option("--triples", build.triples, "Triple file")
      ->required()
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--out", build.out, "Output directory")->required();
  build_cmd->add_flag("--inverse", build.inverse,
                      "Add a reversed token per relation type");

  GenerateArgs gen;
  auto *gen_cmd = app.add_subcommand(
      "generate", "Synthesize a toy KB with planted questions");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--entities", gen.world.entities, "Entity count")
      ->capture_default_str();
  gen_cmd->add_option("--relations", gen.world.relations, "Relation count")
      ->capture_default_str();
  gen_cmd->add_option("--density", gen.world.density,
                      "Chance an entity has edges for an admitted relation")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.world.seed, "Random seed")
      ->capture_default_str();
  gen_cmd->add_option("--train", gen.world.train, "Training questions")
      ->capture_default_str();
  gen_cmd->add_option("--valid", gen.world.valid, "Validation questions")
      ->capture_default_str();
  gen_cmd->add_option("--test", gen.world.test, "Test questions")
      ->capture_default_str();
  gen_cmd->add_option("--two-hop", gen.world.two_hop_fraction,
                      "Share of 2-hop questions")
      ->capture_default_str();
  gen_cmd->add_option("--multi-answer", gen.world.multi_answer_probability,
                      "Chance a subject gets several objects for a relation")
      ->capture_default_str();
  gen_cmd->add_option("--templates", gen.templates,
                      "JSON template set {triple, one_hop, two_hop}")
      ->check(CLI::ExistingFile);

  QuestionsArgs quest;
  auto *quest_cmd = app.add_subcommand(
      "questions", "Turn every triple into a templated question");
  quest_cmd->add_option("--kb", quest.kb, "KB directory or triple file")
      ->required();
  quest_cmd->add_option("--templates", quest.templates, "JSON template set")
      ->check(CLI::ExistingFile);
  quest_cmd->add_option("--out", quest.out, "QA file (default stdout)");
  quest_cmd->add_flag("--inverse", quest.inverse, "Inverse relation tokens");

  TrainArgs train;
  auto *train_cmd = app.add_subcommand("train", "Train an embedding model");
  train_cmd->add_option("--kb", train.kb, "KB directory or triple file")
      ->required();
  train_cmd->add_option("--qa", train.qa, "QA training file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--paraphrases", train.paraphrases,
                        "Paraphrase clusters: cluster<TAB>question")
      ->check(CLI::ExistingFile);
  train_cmd->add_flag("--names", train.names,
                      "Add the entity name mapping task");
  train_cmd->add_flag("--inverse", train.inverse, "Inverse relation tokens");
  train_cmd->add_option("--rep", train.rep, "Answer representation")
      ->check(CLI::IsMember({"entity", "path", "subgraph"}))
      ->capture_default_str();
  train_cmd->add_option("--strategy-eval", train.strategy,
                        "Candidate strategy for the training-set report")
      ->check(CLI::IsMember({"c1", "c2", "all2"}, CLI::ignore_case))
      ->capture_default_str();
  train_cmd->add_option("--k", train.config.dim, "Embedding dimension")
      ->capture_default_str();
  train_cmd->add_option("--lr", train.config.learning_rate, "Learning rate")
      ->capture_default_str();
  train_cmd->add_option("--margin", train.config.margin, "Hinge margin")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.config.epochs, "Epochs")
      ->capture_default_str();
  train_cmd->add_option("--negatives", train.config.negatives_per_example,
                        "Sampled incorrect answers per QA step")
      ->capture_default_str();
  train_cmd->add_option("--steps-per-epoch", train.config.steps_per_epoch,
                        "Steps per epoch, 0 for one pass over the QA set")
      ->capture_default_str();
  train_cmd->add_option("--mix", train.mix,
                        "Task ratios qa:paraphrase:name")
      ->capture_default_str();
  train_cmd->add_option("--cap", train.config.subgraph_cap,
                        "Max neighbors in a subgraph representation")
      ->capture_default_str();
  train_cmd->add_option("--workers", train.config.workers,
                        "Lock-free SGD threads")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.config.seed, "Random seed")
      ->capture_default_str();
  train_cmd->add_option("--out", train.out,
                        "Model path; also writes .dict, .json and .log")
      ->required();

  PredictArgs pred;
  auto add_predict_options = [&](CLI::App *cmd) {
    cmd->add_option("--kb", pred.kb, "KB directory or triple file")
        ->required();
    cmd->add_option("--model", pred.model, "Model file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--strategy", pred.strategy, "Candidate strategy")
        ->check(CLI::IsMember({"c1", "c2", "all2"}, CLI::ignore_case))
        ->capture_default_str();
    cmd->add_option("--rep", pred.rep,
                    "Answer representation (default: as trained)")
        ->check(CLI::IsMember({"entity", "path", "subgraph"}));
    cmd->add_flag("--no-group", pred.no_group,
                  "Answer with the single best path's entity");
    cmd->add_flag("--inverse", pred.inverse, "Inverse relation tokens");
    cmd->add_option("--top-relations", pred.top_relations,
                    "Relation types kept for 2-hop candidates under c2")
        ->capture_default_str();
    cmd->add_option("--one-hop-weight", pred.one_hop_weight,
                    "Score multiplier of 1-hop candidates under c2")
        ->capture_default_str();
  };
  auto *eval_cmd =
      app.add_subcommand("evaluate", "Score a model on a QA file");
  add_predict_options(eval_cmd);
  eval_cmd->add_option("--qa", pred.qa, "QA file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--predictions", pred.predictions,
                       "Write one prediction line per question");
  auto *ask_cmd = app.add_subcommand("ask", "Answer one question");
  add_predict_options(ask_cmd);
  ask_cmd->add_option("question", pred.question, "Question text")
      ->required();

  EnsembleArgs ens;
  auto *ens_cmd = app.add_subcommand(
      "ensemble", "Combine two prediction files by own-score threshold");
  ens_cmd->add_option("--own", ens.own, "Own prediction file")
      ->required()
      ->check(CLI::ExistingFile);
  ens_cmd->add_option("--other", ens.other, "Other prediction file")
      ->required()
      ->check(CLI::ExistingFile);
  ens_cmd->add_option("--fraction", ens.fraction,
                      "Share of questions answered by the own system")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  ens_cmd->add_option("--out", ens.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build_cmd) return BuildKb(build);
    if (*gen_cmd) return Generate(gen);
    if (*quest_cmd) return Questions(quest);
    if (*train_cmd) return Train(train);
    if (*eval_cmd) return Evaluate(pred);
    if (*ask_cmd) return Ask(pred);
    if (*ens_cmd) return Ensemble(ens);
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace kbqa

int main(int argc, char **argv) { return kbqa::Main(argc, argv); }
