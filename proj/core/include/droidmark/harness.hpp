#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "droidmark/attack.hpp"
#include "droidmark/bundle.hpp"
#include "droidmark/fusion.hpp"
#include "droidmark/markov.hpp"
#include "droidmark/metrics.hpp"
#include "droidmark/models.hpp"

// Experiment orchestration: corpus -> features -> attacks -> stratified
// k-fold CV -> benign-ratio sweeps -> metric reports.

namespace droidmark {

enum class FeatureMode { kBase, kExt, kPerm };
const char* feature_mode_name(FeatureMode m);
FeatureMode feature_mode_from_name(const std::string& name);

// Test-set cases of a sweep: clean baseline, the three StB variants, and
// the permission-space adversary.
enum class AttackCase { kNone, kRandomStB, kFullStB, kBlackHoleStB, kPermPerturb };
const char* attack_case_name(AttackCase c);
AttackCase attack_case_from_name(const std::string& name);

struct ExperimentPlan {
    CorpusSpec corpus;
    std::vector<ModelKind> models = {ModelKind::kDecisionTree};
    std::vector<AttackCase> attacks = {AttackCase::kNone};
    std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    int folds = 5;
    FeatureMode feature_mode = FeatureMode::kBase;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir;  // empty: no files written
    int threads = 1;
    double vocab_threshold = 0.10;
    double modal_threshold = 0.50;  // benign profile for permission_perturb
    int perturb_budget = 1 << 20;   // effectively unbounded

    void validate() const;
};

// Per-app fold index, stratified by label. Throws if k exceeds the
// smaller class count.
std::vector<int> kfold_split(const std::vector<Label>& labels, int k,
                             std::uint64_t seed);

// Keeps every malicious index and floor(ratio * n_benign) benign indices,
// deterministically under the seed. Throws if no benign sample survives.
std::vector<std::size_t> subsample_benign(const std::vector<std::size_t>& train,
                                          const std::vector<Label>& labels,
                                          double ratio, std::uint64_t seed);

struct CellResult {
    ModelKind model;
    double ratio;
    AttackCase attack;
    int fold;
    double er, drr, reliability, recall, f1;
};

struct ExperimentResult {
    std::vector<CellResult> per_fold;          // every (model,ratio,attack,fold)
    std::vector<EvaluationReport> aggregated;  // fold-averaged
};

// Runs the full grid on the given corpus: per fold, trains on the clean
// subsampled training fold and evaluates ER/DRR/reliability on the
// (possibly attacked) malicious test fold and recall/F1 on the mixed test
// fold. Attack statistics for the full-statistical variant come from the
// training fold only; black-hole statistics from the malicious test fold
// only. Deterministic under plan.seed, including parallel execution.
ExperimentResult run_experiment(const ExperimentPlan& plan,
                                const std::vector<std::pair<AppBundle, Label>>& corpus);

// Generates the corpus from plan.corpus first.
ExperimentResult run_experiment(const ExperimentPlan& plan);

// Corpus on disk: one bundle directory per app plus labels.csv.
void write_corpus(const std::vector<std::pair<AppBundle, Label>>& corpus,
                  const std::filesystem::path& dir);
std::vector<std::pair<AppBundle, Label>> read_corpus(const std::filesystem::path& dir);

// Feature matrix CSV: header `app_id,label,<feature names>`, one row per
// app, 9 significant digits.
void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& feature_names,
                       const std::vector<std::string>& app_ids,
                       const std::vector<Label>& labels,
                       const std::vector<std::vector<double>>& rows);
struct FeatureCsv {
    std::vector<std::string> feature_names;
    std::vector<std::string> app_ids;
    std::vector<Label> labels;
    std::vector<std::vector<double>> rows;
};
FeatureCsv read_feature_csv(const std::filesystem::path& path);

// `key = value` experiment config (corpus knobs plus plan fields).
ExperimentPlan parse_plan(const std::filesystem::path& path);

}  // namespace droidmark
