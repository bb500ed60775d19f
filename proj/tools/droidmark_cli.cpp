// Command-line front end for the droidmark library.
//
// Subcommands:
//   generate-corpus   synthesize a labeled corpus of app bundles on disk
//   extract-features  parse bundles and write a Markov feature CSV
//   fuse-vocab        build a permission vocabulary from a corpus
//   attack            apply a structure-break evasion to malicious bundles
//   train             fit a single model on a feature CSV
//   evaluate          score a trained model against a feature CSV
//   sweep             full cross-validated ratio/attack experiment sweep

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "droidmark/abstraction.hpp"
#include "droidmark/attack.hpp"
#include "droidmark/bundle.hpp"
#include "droidmark/fusion.hpp"
#include "droidmark/harness.hpp"
#include "droidmark/markov.hpp"
#include "droidmark/metrics.hpp"
#include "droidmark/models.hpp"

namespace fs = std::filesystem;
using namespace droidmark;

namespace {

using Corpus = std::vector<std::pair<AppBundle, Label>>;

std::string app_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "app_%05zu", index);
  return buf;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

FeatureVector bundle_features(const AppBundle& bundle, const std::string& app_id) {
  return matrix_to_features(
      build_transition_matrix(extract_call_sequences(bundle, app_id)));
}

int cmd_generate_corpus(const std::string& config, std::uint64_t seed, bool seed_set,
                        const std::string& out_dir, std::size_t benign,
                        std::size_t malicious) {
  CorpusSpec spec;
  if (!config.empty()) spec = parse_corpus_spec(config);
  if (benign != 0) spec.benign_count = benign;
  if (malicious != 0) spec.malicious_count = malicious;
  if (seed_set) spec.seed = seed;
  spec.validate();
  Corpus corpus = generate_corpus(spec);
  write_corpus(corpus, out_dir);
  std::size_t n_benign = 0;
  for (const auto& [b, label] : corpus)
    if (label == Label::kBenign) ++n_benign;
  std::printf("wrote %zu bundles (%zu benign, %zu malicious) to %s\n",
              corpus.size(), n_benign, corpus.size() - n_benign, out_dir.c_str());
  return 0;
}

int cmd_extract_features(const std::string& corpus_dir, const std::string& out_file) {
  Corpus corpus = read_corpus(corpus_dir);
  std::vector<std::string> ids;
  std::vector<Label> labels;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ids.push_back(app_id_for(i));
    labels.push_back(corpus[i].second);
    rows.push_back(bundle_features(corpus[i].first, ids.back()));
  }
  write_feature_csv(out_file, markov_feature_names(), ids, labels, rows);
  std::printf("wrote %zu feature rows to %s\n", rows.size(), out_file.c_str());
  return 0;
}

int cmd_fuse_vocab(const std::string& corpus_dir, double threshold,
                   const std::string& out_file) {
  Corpus corpus = read_corpus(corpus_dir);
  PermissionVocabulary vocab = build_permission_vocab(corpus, threshold);
  write_vocab(vocab, corpus_permission_hash(corpus), out_file);
  std::printf("retained %zu permissions at threshold %g -> %s\n",
              vocab.names.size(), threshold, out_file.c_str());
  return 0;
}

int cmd_attack(const std::string& corpus_dir, const std::string& variant_name,
               std::uint64_t seed, const std::string& out_dir) {
  Corpus corpus = read_corpus(corpus_dir);

  AttackVariant variant;
  if (variant_name == "random") variant = AttackVariant::kRandom;
  else if (variant_name == "full_statistical") variant = AttackVariant::kFullStatistical;
  else if (variant_name == "black_hole") variant = AttackVariant::kBlackHole;
  else throw std::runtime_error("unknown attack variant: " + variant_name);

  // With no train/test split available, the statistical variants are driven
  // by whole-corpus feature statistics.
  CorpusStatistics stats;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    FeatureVector f = bundle_features(corpus[i].first, app_id_for(i));
    if (corpus[i].second == Label::kBenign) {
      stats.train_benign.push_back(std::move(f));
    } else {
      stats.train_malicious.push_back(f);
      stats.test_malicious.push_back(std::move(f));
    }
  }

  AttackConfig cfg = make_variant_config(variant, stats, seed);
  fs::create_directories(out_dir);
  std::ofstream report(fs::path(out_dir) / "attack_report.csv");
  report << "app_id,variant,element,level,p,rewrites\n";

  std::size_t attacked = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].second != Label::kMalicious) continue;
    AttackConfig app_cfg = cfg;
    app_cfg.seed = splitmix64(seed ^ splitmix64(i));
    AttackOutcome outcome = structure_break(corpus[i].first, app_cfg);
    write_bundle(outcome.bundle, fs::path(out_dir) / app_id_for(i));
    report << attack_report_csv(app_id_for(i), outcome, variant) << "\n";
    ++attacked;
  }
  std::printf("attacked %zu malicious bundles (%s) -> %s\n", attacked,
              variant_name.c_str(), out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& feature_file, const std::string& model_name,
              std::uint64_t seed, const std::string& out_file) {
  ModelKind kind = model_kind_from_name(model_name);
  FeatureCsv csv = read_feature_csv(feature_file);
  LabeledDataset data;
  data.reserve(csv.rows.size());
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    data.push_back({csv.rows[i], csv.labels[i]});
  TrainedModel model = fit(kind, data, seed);
  model.save(out_file);
  std::printf("trained %s on %zu samples -> %s\n", model_name.c_str(),
              data.size(), out_file.c_str());
  return 0;
}

int cmd_evaluate(const std::string& model_file, const std::string& feature_file) {
  TrainedModel model = TrainedModel::load(model_file);
  FeatureCsv csv = read_feature_csv(feature_file);

  EvaluationSet set;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    Prediction pred = model.predict(csv.rows[i]);
    if (pred.label == csv.labels[i]) ++correct;
    set.push_back({csv.labels[i], pred});
  }
  if (set.empty()) throw std::runtime_error("feature file has no rows");
  double drr = drr_overall(set);
  double rel = model_reliability(set);
  auto [recall, f1] = recall_f1(set);
  std::printf("samples=%zu accuracy=%.9g drr=%.9g reliability=%.9g "
              "recall=%.9g f1=%.9g\n",
              set.size(), double(correct) / double(set.size()), drr, rel,
              recall, f1);
  return 0;
}

int cmd_sweep(const std::string& config, std::uint64_t seed, bool seed_set,
              const std::string& out_dir, int threads) {
  ExperimentPlan plan;
  if (!config.empty()) plan = parse_plan(config);
  if (seed_set) {
    plan.seed = seed;
    plan.corpus.seed = seed;
  }
  if (!out_dir.empty()) plan.out_dir = out_dir;
  if (threads != 0) plan.threads = threads;
  plan.validate();
  ExperimentResult result = run_experiment(plan);
  std::printf("sweep complete: %zu aggregated rows, %zu per-fold rows -> %s\n",
              result.aggregated.size(), result.per_fold.size(),
              plan.out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov call-graph malware feature pipeline"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  auto* gen = app.add_subcommand("generate-corpus",
                                 "Synthesize a labeled bundle corpus");
  std::size_t gen_benign = 0, gen_malicious = 0;
  gen->add_option("--config", config, "Corpus spec file (key = value)");
  auto* gen_seed = gen->add_option("--seed", seed, "Corpus RNG seed");
  gen->add_option("--out-dir", out_dir, "Output corpus directory");
  gen->add_option("--benign", gen_benign, "Override benign app count");
  gen->add_option("--malicious", gen_malicious, "Override malicious app count");

  auto* ext = app.add_subcommand("extract-features",
                                 "Bundle corpus -> Markov feature CSV");
  std::string ext_corpus, ext_out = "features.csv";
  ext->add_option("--corpus", ext_corpus, "Corpus directory")->required();
  ext->add_option("--out", ext_out, "Output feature CSV");

  auto* fuse = app.add_subcommand("fuse-vocab", "Build a permission vocabulary");
  std::string fuse_corpus, fuse_out = "vocab.txt";
  double fuse_threshold = 0.10;
  fuse->add_option("--corpus", fuse_corpus, "Corpus directory")->required();
  fuse->add_option("--threshold", fuse_threshold, "Per-class frequency threshold");
  fuse->add_option("--out", fuse_out, "Output vocabulary file");

  auto* atk = app.add_subcommand(
      "attack", "Apply a structure-break evasion to malicious bundles");
  std::string atk_corpus, atk_variant = "random";
  atk->add_option("--corpus", atk_corpus, "Corpus directory")->required();
  atk->add_option("--variant", atk_variant, "random | full_statistical | black_hole");
  atk->add_option("--seed", seed, "Attack RNG seed");
  atk->add_option("--out-dir", out_dir, "Output directory for attacked bundles");

  auto* train = app.add_subcommand("train", "Fit a model on a feature CSV");
  std::string train_features, train_model = "dt", train_out = "model.txt";
  train->add_option("--features", train_features, "Input feature CSV")->required();
  train->add_option("--model", train_model, "1nn | 3nn | 5nn | dt | rf | adaboost");
  train->add_option("--seed", seed, "Training RNG seed");
  train->add_option("--out", train_out, "Model dump file");

  auto* eval = app.add_subcommand("evaluate",
                                  "Score a trained model on a feature CSV");
  std::string eval_model, eval_features;
  eval->add_option("--model", eval_model, "Model dump file")->required();
  eval->add_option("--features", eval_features, "Feature CSV")->required();

  auto* sweep = app.add_subcommand(
      "sweep", "Cross-validated ratio/attack experiment sweep");
  int sweep_threads = 0;
  sweep->add_option("--config", config, "Experiment plan file (key = value)");
  auto* sweep_seed = sweep->add_option("--seed", seed, "Experiment seed");
  sweep->add_option("--out-dir", out_dir, "Report output directory");
  sweep->add_option("--threads", sweep_threads, "Worker thread count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate_corpus(config, seed, gen_seed->count() > 0, out_dir,
                                 gen_benign, gen_malicious);
    if (ext->parsed()) return cmd_extract_features(ext_corpus, ext_out);
    if (fuse->parsed()) return cmd_fuse_vocab(fuse_corpus, fuse_threshold, fuse_out);
    if (atk->parsed()) return cmd_attack(atk_corpus, atk_variant, seed, out_dir);
    if (train->parsed())
      return cmd_train(train_features, train_model, seed, train_out);
    if (eval->parsed()) return cmd_evaluate(eval_model, eval_features);
    if (sweep->parsed())
      return cmd_sweep(config, seed, sweep_seed->count() > 0, out_dir,
                       sweep_threads);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
