/* Copyright 2026 The Halloc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// halloc: batch scoring, toy PPO training, evaluation and the scoring
// service.
//
// Exit codes: 0 ok, 1 partial failure, 2 bad input, 3 divergence.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "halloc/config.h"
#include "halloc/error.h"
#include "halloc/eval.h"
#include "halloc/oracle.h"
#include "halloc/service.h"
#include "halloc/toy_mdp.h"
#include "httplib.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitDivergence = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::string out;
  std::string manifest;
  std::optional<int> steps;
  std::optional<int> port;
};

halloc::RunConfig ResolveConfig(const Flags& flags) {
  halloc::RunConfig config = halloc::LoadConfig(flags.config);
  if (flags.seed) {
    config.seed = *flags.seed;
    config.backend.seed_base = static_cast<std::int64_t>(*flags.seed);
  }
  if (flags.k) config.backend.reconstruction_count = *flags.k;
  if (flags.alpha) config.reward.alpha = *flags.alpha;
  if (flags.beta) config.reward.beta = *flags.beta;
  if (!flags.out.empty()) config.output = flags.out;
  if (!flags.manifest.empty()) config.manifest = flags.manifest;
  if (flags.port) config.port = *flags.port;
  config.Validate();
  return config;
}

// Writes `text` to `path`, or stdout when `path` is empty.
void Emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw halloc::Error(halloc::ErrorCode::kInvalidArgument, "cannot write " + path);
  }
  out << text;
}

int CmdScore(const halloc::RunConfig& config) {
  if (config.manifest.empty()) {
    throw halloc::Error(halloc::ErrorCode::kInvalidArgument,
                        "no manifest given (--manifest or run.manifest)");
  }
  auto scorer = halloc::Scorer::FromConfig(config);
  halloc::BatchResult result;
  if (config.output.empty()) {
    result = halloc::ScoreManifest(*scorer, config.manifest, std::cout);
  } else {
    std::ofstream out(config.output);
    if (!out) {
      throw halloc::Error(halloc::ErrorCode::kInvalidArgument,
                          "cannot write " + config.output);
    }
    result = halloc::ScoreManifest(*scorer, config.manifest, out);
  }
  std::cerr << "scored " << result.lines << " lines, " << result.failed
            << " failed\n";
  return result.failed == 0 ? kExitOk : kExitPartial;
}

int CmdTrain(const halloc::RunConfig& config, const Flags& flags) {
  halloc::ToyMdpSpec spec;
  if (config.train_spec.empty()) {
    spec = halloc::ToyMdpSpec::Default();
    spec.reward = config.reward;
    spec.ppo = config.ppo;
    spec.seed = config.seed;
    spec.k = config.backend.reconstruction_count;
  } else {
    std::ifstream in(config.train_spec);
    if (!in) {
      throw halloc::Error(halloc::ErrorCode::kInvalidArgument,
                          "cannot read " + config.train_spec);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    spec = halloc::ToyMdpSpec::FromJson(buffer.str());
    if (flags.seed) spec.seed = *flags.seed;
    if (flags.k) spec.k = *flags.k;
    if (flags.alpha) spec.reward.alpha = *flags.alpha;
    if (flags.beta) spec.reward.beta = *flags.beta;
  }
  if (flags.steps) spec.updates = *flags.steps;
  spec.Validate();

  halloc::ToyTrainer trainer(spec);
  std::cout << nlohmann::ordered_json{{"step", 0},
                                      {"hallucination_rate",
                                       trainer.HallucinationRate()}}
                   .dump()
            << "\n";
  for (int i = 0; i < spec.updates; ++i) {
    try {
      std::cout << trainer.Step().ToJson() << "\n";
    } catch (const halloc::Error& e) {
      if (e.code() != halloc::ErrorCode::kDivergence) throw;
      const std::string dump =
          (config.output.empty() ? std::string("halloc_train") : config.output) +
          ".divergence.json";
      Emit(dump, trainer.policy().ToJson());
      std::cerr << "diverged at step " << trainer.steps_done() + 1 << ": "
                << e.what() << "; state dumped to " << dump << "\n";
      return kExitDivergence;
    }
  }
  std::cout.flush();
  const std::string policy = trainer.policy().ToJson();
  if (config.output.empty()) {
    std::cout << policy << "\n";
  } else {
    Emit(config.output, policy + "\n");
  }
  return kExitOk;
}

std::map<std::string, std::string> Context(const halloc::RunConfig& config) {
  return {{"sigma", std::to_string(config.oracle.sigma)},
          {"k", std::to_string(config.backend.reconstruction_count)},
          {"seed", std::to_string(config.seed)}};
}

int CmdWinRate(const halloc::RunConfig& config) {
  const auto scenes =
      config.scenes.empty()
          ? halloc::EnumerateSceneFamily(config.eval.max_objects, config.eval.variants)
          : halloc::LoadScenes(config.scenes);
  halloc::PipelineRun run;
  run.oracle = config.oracle;
  run.k = config.backend.reconstruction_count;
  run.seed_base = config.backend.seed_base;
  run.threads = config.parallelism;
  halloc::MetricsReport report;
  report.win_rate = halloc::FamilyWinRate(halloc::EnumerateFamilyCases(scenes), run);
  report.context = Context(config);
  Emit(config.output, report.ToJson());
  return kExitOk;
}

int CmdChair(const halloc::RunConfig& config) {
  const auto vocab = config.eval.vocabulary.empty()
                         ? halloc::ObjectVocabulary::Default()
                         : halloc::ObjectVocabulary::Load(config.eval.vocabulary);
  std::vector<halloc::ChairCaption> corpus;
  if (config.eval.corpus.empty()) {
    const auto scenes =
        config.scenes.empty()
            ? halloc::EnumerateSceneFamily(config.eval.max_objects, config.eval.variants)
            : halloc::LoadScenes(config.scenes);
    corpus = halloc::SyntheticChairCorpus(scenes, vocab);
  } else {
    corpus = halloc::LoadChairCorpus(config.eval.corpus, vocab,
                                     halloc::RuleBasedChunker{});
  }
  halloc::MetricsReport report;
  report.chair = halloc::Chair(corpus, vocab);
  report.context = Context(config);
  Emit(config.output, report.ToJson());
  return kExitOk;
}

int CmdStability(const halloc::RunConfig& config) {
  const auto scenes =
      config.scenes.empty()
          ? halloc::EnumerateSceneFamily(config.eval.max_objects, config.eval.variants)
          : halloc::LoadScenes(config.scenes);
  halloc::StabilityOptions options;
  options.oracle = config.oracle;
  options.ks = config.eval.ks;
  options.trials = config.eval.trials;
  options.seed = config.seed;
  options.threads = config.parallelism;
  halloc::MetricsReport report;
  report.stability = halloc::RunStability(scenes, options);
  report.context = Context(config);
  if (config.output.empty()) {
    std::cout << report.ToJson();
  } else {
    Emit(config.output, report.ToJson());
  }
  std::cout << report.StabilityTable();
  return kExitOk;
}

int CmdServe(const halloc::RunConfig& config) {
  auto scorer = halloc::Scorer::FromConfig(config);
  httplib::Server server;
  const int threads = config.parallelism;
  server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  halloc::MountScoreRoutes(server, *scorer,
                           config.mode == halloc::BackendMode::kOracle);
  std::cerr << "serving on " << config.host << ":" << config.port << "\n";
  if (!server.listen(config.host, config.port)) {
    throw halloc::Error(halloc::ErrorCode::kInvalidArgument,
                        "cannot listen on " + config.host + ":" +
                            std::to_string(config.port));
  }
  return kExitOk;
}

int ExitCodeFor(const halloc::Error& e) {
  switch (e.code()) {
    case halloc::ErrorCode::kDivergence:
      return kExitDivergence;
    case halloc::ErrorCode::kTransport:
      return kExitPartial;
    default:
      return kExitBadInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference-free hallucination detection and fine-grained rewards"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "Run configuration (JSON)");
  app.add_option("--seed", flags.seed, "Seed for sampling and reconstructions");
  app.add_option("--k", flags.k, "Reconstructions per caption")->check(CLI::Range(1, 64));
  app.add_option("--alpha", flags.alpha, "Penalty weight")->check(CLI::Range(0.0, 1.0));
  app.add_option("--beta", flags.beta, "KL coefficient")->check(CLI::NonNegativeNumber);
  app.add_option("--out", flags.out, "Output path (default: stdout)");

  auto* score = app.add_subcommand("score", "Score a caption manifest");
  score->add_option("--manifest", flags.manifest, "Manifest (one request per line)");
  auto* train = app.add_subcommand("train", "Train the toy policy with fine-grained PPO");
  train->add_option("--steps", flags.steps, "Number of PPO updates")
      ->check(CLI::NonNegativeNumber);
  app.add_subcommand("winrate", "Win rate of rewards on the oracle scene family");
  app.add_subcommand("chair", "CHAIR metrics over a caption corpus");
  app.add_subcommand("stability", "Win rate against the number of reconstructions");
  auto* serve = app.add_subcommand("serve", "Run the scoring service");
  serve->add_option("--port", flags.port, "Listening port")->check(CLI::Range(0, 65535));

  CLI11_PARSE(app, argc, argv);

  try {
    const halloc::RunConfig config = ResolveConfig(flags);
    if (score->parsed()) return CmdScore(config);
    if (train->parsed()) return CmdTrain(config, flags);
    if (app.got_subcommand("winrate")) return CmdWinRate(config);
    if (app.got_subcommand("chair")) return CmdChair(config);
    if (app.got_subcommand("stability")) return CmdStability(config);
    if (serve->parsed()) return CmdServe(config);
  } catch (const halloc::Error& e) {
    std::cerr << "halloc: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "halloc: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
