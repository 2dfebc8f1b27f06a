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

#include <random>
#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "halloc/caption.h"
#include "halloc/detection.h"
#include "halloc/oracle.h"
#include "halloc/ppo.h"
#include "halloc/reward.h"

namespace {

const char kCaption[] =
    "A red ball is to the left of a blue box, which is above a green cup. "
    "There is also a clock.";

void BM_Tokenize(benchmark::State& state) {
  std::string caption;
  for (int i = 0; i < state.range(0); ++i) caption += kCaption, caption += " ";
  for (auto _ : state) benchmark::DoNotOptimize(halloc::Tokenize(caption));
  state.SetBytesProcessed(state.iterations() * caption.size());
}
BENCHMARK(BM_Tokenize)->Arg(1)->Arg(16);

void BM_ExtractPhrases(benchmark::State& state) {
  const auto seq = halloc::Tokenize(kCaption);
  const halloc::RuleBasedChunker chunker;
  for (auto _ : state) {
    benchmark::DoNotOptimize(halloc::ExtractObjectPhrases(seq, chunker));
  }
}
BENCHMARK(BM_ExtractPhrases);

void BM_OracleDetect(benchmark::State& state) {
  const auto scenes = halloc::EnumerateSceneFamily(3, 2);
  const auto& scene = scenes.back();
  const std::string caption = halloc::RenderCaption(scene);
  for (auto _ : state) {
    benchmark::DoNotOptimize(halloc::OracleDetect(scene, caption));
  }
}
BENCHMARK(BM_OracleDetect);

void BM_DetectPipeline(benchmark::State& state) {
  const auto scenes = halloc::EnumerateSceneFamily(3, 2);
  const auto& scene = scenes.back();
  const std::string caption = halloc::RenderCaption(scene);
  auto backend = std::make_shared<halloc::OracleBackend>();
  halloc::BackendConfig config;
  config.reconstruction_count = static_cast<int>(state.range(0));
  halloc::ModelGateway gateway(config, backend);
  const auto original = halloc::OracleBackend::RenderScene(scene);
  const halloc::RuleBasedChunker chunker;
  halloc::DetectOptions options;
  options.parallel = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        halloc::Detect(caption, original, gateway, chunker, options));
  }
}
BENCHMARK(BM_DetectPipeline)->Arg(1)->Arg(4);

void BM_AssembleRewards(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  halloc::DetectionReport report;
  report.r_rec = 0.7;
  for (int t = 0; t < T; t += 5) {
    report.penalties.push_back({t, halloc::PenaltyKind::kAttribute, -0.3, {}});
  }
  std::vector<double> logp(T, -1.0), ref(T, -1.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(halloc::AssembleRewards(report, logp, ref));
  }
}
BENCHMARK(BM_AssembleRewards)->Arg(32)->Arg(256);

void BM_Gae(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  std::vector<double> r(T), v(T);
  for (int t = 0; t < T; ++t) r[t] = gauss(rng), v[t] = gauss(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(halloc::ComputeGae(r, v, 1.0, 0.95));
  }
}
BENCHMARK(BM_Gae)->Arg(64)->Arg(256);

void BM_PpoUpdate(benchmark::State& state) {
  halloc::ToyPolicy policy(6, 1);
  const halloc::ToyPolicy reference = policy;
  std::mt19937_64 rng(3);
  halloc::TrajectoryBatch batch;
  for (int e = 0; e < 16; ++e) {
    auto ep = halloc::SampleEpisode(policy, reference, 0, 4, rng);
    for (auto& r : ep.rewards) r = -0.1;
    batch.episodes.push_back(std::move(ep));
  }
  halloc::PpoConfig config;
  for (auto _ : state) {
    halloc::ToyPolicy p = policy;
    halloc::AdamOptimizer opt(config);
    benchmark::DoNotOptimize(halloc::PpoUpdate(p, batch, config, opt));
  }
}
BENCHMARK(BM_PpoUpdate);

}  // namespace

BENCHMARK_MAIN();
