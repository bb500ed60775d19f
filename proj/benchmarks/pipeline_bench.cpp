// Microbenchmarks for the pipeline hot paths: corpus generation, feature
// extraction, the structure-break attack, and model fitting.

#include <benchmark/benchmark.h>

#include <vector>

#include "droidmark/abstraction.hpp"
#include "droidmark/attack.hpp"
#include "droidmark/bundle.hpp"
#include "droidmark/markov.hpp"
#include "droidmark/models.hpp"

using namespace droidmark;

namespace {

std::vector<std::pair<AppBundle, Label>> bench_corpus(int benign, int malicious) {
    CorpusSpec spec;
    spec.benign_count = benign;
    spec.malicious_count = malicious;
    spec.seed = 1;
    return generate_corpus(spec);
}

void BM_GenerateCorpus(benchmark::State& state) {
    CorpusSpec spec;
    spec.benign_count = static_cast<int>(state.range(0));
    spec.malicious_count = static_cast<int>(state.range(0)) / 10;
    spec.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(generate_corpus(spec));
    state.SetItemsProcessed(state.iterations() *
                            (spec.benign_count + spec.malicious_count));
}
BENCHMARK(BM_GenerateCorpus)->Arg(100)->Arg(500);

void BM_ExtractFeatures(benchmark::State& state) {
    auto corpus = bench_corpus(100, 10);
    for (auto _ : state) {
        for (const auto& [bundle, label] : corpus)
            benchmark::DoNotOptimize(
                matrix_to_features(build_transition_matrix(extract_call_sequences(bundle))));
    }
    state.SetItemsProcessed(state.iterations() * corpus.size());
}
BENCHMARK(BM_ExtractFeatures);

void BM_StructureBreak(benchmark::State& state) {
    auto corpus = bench_corpus(0, 50);
    AttackConfig cfg;
    cfg.mode_elements = {Family::kAndroid, Family::kJava, Family::kDom};
    cfg.level_policy = {LevelPolicy::kUniform, 0};
    cfg.ratio_policy = {RatioPolicy::kUniform, 0.0};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        for (const auto& [bundle, label] : corpus) {
            cfg.seed = ++seed;
            benchmark::DoNotOptimize(structure_break(bundle, cfg));
        }
    }
    state.SetItemsProcessed(state.iterations() * corpus.size());
}
BENCHMARK(BM_StructureBreak);

void BM_FitModel(benchmark::State& state) {
    auto corpus = bench_corpus(200, 40);
    LabeledDataset data;
    for (const auto& [bundle, label] : corpus)
        data.push_back({matrix_to_features(
                            build_transition_matrix(extract_call_sequences(bundle))),
                        label});
    ModelKind kind = static_cast<ModelKind>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit(kind, data, 7));
}
BENCHMARK(BM_FitModel)
    ->Arg(static_cast<int>(ModelKind::kDecisionTree))
    ->Arg(static_cast<int>(ModelKind::kRandomForest))
    ->Arg(static_cast<int>(ModelKind::kAdaBoost));

}  // namespace

BENCHMARK_MAIN();
