// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria cover metric exactness, Markov matrix properties,
// attack correctness, model oracle equivalence, directional classifier
// behavior on the synthetic corpus, ratio-sweep shape, and byte-identical
// determinism of the sweep outputs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "droidmark/abstraction.hpp"
#include "droidmark/attack.hpp"
#include "droidmark/bundle.hpp"
#include "droidmark/harness.hpp"
#include "droidmark/markov.hpp"
#include "droidmark/metrics.hpp"
#include "droidmark/models.hpp"
#include "test_fixtures.hpp"

using namespace droidmark;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
    const char* name;
    Clock::time_point start = Clock::now();
    bool ok = true;
    std::string detail;

    explicit Criterion(const char* n) : name(n) {}

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;  // keep the first failure
        ok = ok && cond;
    }

    void finish() {
        double secs = std::chrono::duration<double>(Clock::now() - start).count();
        std::printf("%s %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", name, secs,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

FeatureVector bundle_features(const AppBundle& b) {
    return matrix_to_features(build_transition_matrix(extract_call_sequences(b)));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_metric_exactness() {
    Criterion c("criterion 1: metric exactness (DRR and reliability oracles)");

    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
    c.expect(close(drr_sample({1.0, 1}), 1.0), "drr(1.0, rank 1) != 1.0");
    c.expect(close(drr_sample({0.5, 1}), 0.75), "drr(0.5, rank 1) != 0.75");
    c.expect(close(drr_sample({0.4, 2}), 0.4 / 3 + 1.0 / 3), "drr(0.4, rank 2)");
    c.expect(std::abs(drr_sample({0.4, 2}) - 0.4667) <= 5e-5, "drr(0.4, rank 2) != 0.4667");
    c.expect(close(drr_sample({0.0, 2}), 1.0 / 3), "drr(0.0, rank 2)");
    c.expect(std::abs(drr_sample({0.0, 2}) - 0.3333) <= 5e-5, "drr(0.0, rank 2) != 0.3333");

    auto binary_pred = [](Label truth, double p) {
        Prediction pred;
        pred.p_malicious = p;
        pred.p_benign = 1.0 - p;
        pred.label = p > 0.5 ? Label::kMalicious : Label::kBenign;
        return SampleRecord{truth, pred};
    };
    EvaluationSet binary = {binary_pred(Label::kMalicious, 1.0),
                            binary_pred(Label::kBenign, 0.0),
                            binary_pred(Label::kMalicious, 0.0)};
    c.expect(model_reliability(binary) == 1.0, "all-binary reliability not exactly 1.0");

    EvaluationSet halves = {binary_pred(Label::kMalicious, 0.5),
                            binary_pred(Label::kBenign, 0.5)};
    c.expect(std::abs(model_reliability(halves) - 0.3069) <= 1e-3,
             "all-0.5 reliability not 0.3069 +/- 1e-3");
    c.finish();
}

void criterion_2_markov_properties() {
    Criterion c("criterion 2: Markov row stochasticity over 1000+ bundles");

    CorpusSpec spec;
    spec.benign_count = 600;
    spec.malicious_count = 500;
    spec.seed = 20240817;
    auto corpus = generate_corpus(spec);
    c.expect(corpus.size() >= 1000, "corpus smaller than 1000 bundles");

    for (const auto& [bundle, label] : corpus) {
        TransitionMatrix m = build_transition_matrix(extract_call_sequences(bundle));
        FeatureVector v = matrix_to_features(m);
        if (v.size() != 121) {
            c.expect(false, "feature vector length != 121");
            break;
        }
        for (int s = 0; s < kFamilyCount && c.ok; ++s) {
            double row = 0.0;
            bool all_zero = true;
            for (int d = 0; d < kFamilyCount; ++d) {
                row += m.p[s][d];
                all_zero = all_zero && m.p[s][d] == 0.0;
            }
            if (all_zero) c.expect(row == 0.0, "zero row not exactly zero");
            else c.expect(std::abs(row - 1.0) <= 1e-9, "row sum outside 1 +/- 1e-9");
        }
        if (!c.ok) break;
    }
    c.finish();
}

void criterion_3_attack_correctness() {
    Criterion c("criterion 3: attack integrity/conservation over 200+ bundles per variant");

    CorpusSpec spec;
    spec.benign_count = 0;
    spec.malicious_count = 210;
    spec.seed = 31337;
    auto corpus = generate_corpus(spec);

    CorpusStatistics stats;
    for (const auto& [bundle, label] : corpus) {
        FeatureVector f = bundle_features(bundle);
        stats.train_benign.push_back(f);
        stats.train_malicious.push_back(f);
        stats.test_malicious.push_back(f);
    }

    struct Counts {
        std::size_t units = 0, methods = 0, calls = 0;
        bool operator==(const Counts&) const = default;
    };
    auto count = [](const AppBundle& b) {
        Counts k;
        std::vector<const DirNode*> stack;
        for (const auto& r : b.code_tree.roots) stack.push_back(&r);
        while (!stack.empty()) {
            const DirNode* n = stack.back();
            stack.pop_back();
            k.units += n->units.size();
            for (const auto& u : n->units)
                for (const auto& m : u.methods) {
                    ++k.methods;
                    k.calls += m.calls.size();
                }
            for (const auto& ch : n->children) stack.push_back(&ch);
        }
        return k;
    };

    for (AttackVariant variant :
         {AttackVariant::kRandom, AttackVariant::kFullStatistical,
          AttackVariant::kBlackHole}) {
        AttackConfig cfg = make_variant_config(variant, stats, 99);
        for (std::size_t i = 0; i < corpus.size() && c.ok; ++i) {
            AttackConfig app_cfg = cfg;
            app_cfg.seed = 5000 + i;
            AttackOutcome out = structure_break(corpus[i].first, app_cfg);

            c.expect(check_integrity(out.bundle).empty(),
                     std::string("integrity violation under ") + attack_variant_name(variant));
            c.expect(count(corpus[i].first) == count(out.bundle),
                     std::string("unit/method/call counts not conserved under ") +
                         attack_variant_name(variant));

            // every moved unit abstracts to the drawn element
            for (const auto& root : out.bundle.code_tree.roots) {
                if (root.name != std::string(family_name(out.element))) continue;
                std::vector<const DirNode*> stack = {&root};
                while (!stack.empty()) {
                    const DirNode* n = stack.back();
                    stack.pop_back();
                    for (const auto& u : n->units)
                        c.expect(abstract_name(u.qualified_name) == out.element,
                                 "moved unit does not abstract to the chosen element");
                    for (const auto& ch : n->children) stack.push_back(&ch);
                }
            }
        }
    }

    // worked example: com/tb moves under a new android root, com keeps xz
    AppBundle ex = testing::example_bundle();
    AttackOutcome out = apply_structure_break(ex, Family::kAndroid, {"com.tb"}, 1, 0.5);
    bool shape = out.bundle.code_tree.roots.size() == 2 &&
                 out.bundle.code_tree.roots[0].name == "android" &&
                 out.bundle.code_tree.roots[0].children.size() == 1 &&
                 out.bundle.code_tree.roots[0].children[0].name == "tb" &&
                 out.bundle.code_tree.roots[0].children[0].units.size() == 2 &&
                 out.bundle.code_tree.roots[0].children[0].units[0].qualified_name ==
                     "android.tb.x1" &&
                 out.bundle.code_tree.roots[0].children[0].units[1].qualified_name ==
                     "android.tb.x2" &&
                 out.bundle.code_tree.roots[1].name == "com" &&
                 out.bundle.code_tree.roots[1].children.size() == 1 &&
                 out.bundle.code_tree.roots[1].children[0].name == "xz";
    c.expect(shape, "worked example output tree mismatch");
    c.expect(out.bundle.manifest.components == std::vector<std::string>{"android.tb.x1"},
             "worked example manifest not rewritten");
    c.finish();
}

void criterion_4_oracle_equivalence() {
    Criterion c("criterion 4: kNN and DT match brute-force oracles on 100 datasets");

    std::mt19937_64 rng(271828);
    int checked = 0;
    for (int trial = 0; trial < 100 && c.ok; ++trial) {
        std::size_t n = 4 + rng() % 47;   // <= 50 samples
        std::size_t d = 1 + rng() % 4;    // <= 4 features
        LabeledDataset data;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(d);
            for (auto& v : x) v = static_cast<double>(rng() % 10000) / 10000.0;
            data.push_back({std::move(x), rng() % 2 ? Label::kMalicious : Label::kBenign});
        }
        data[0].y = Label::kBenign;
        data[n - 1].y = Label::kMalicious;

        TrainedModel knn1 = fit(ModelKind::k1NN, data, 1);
        TrainedModel knn3 = fit(ModelKind::k3NN, data, 1);
        TrainedModel knn5 = fit(ModelKind::k5NN, data, 1);
        TrainedModel dt = fit(ModelKind::kDecisionTree, data, 1);

        for (int p = 0; p < 20 && c.ok; ++p) {
            std::vector<double> x(d);
            for (auto& v : x) v = static_cast<double>(rng() % 10000) / 10000.0;
            c.expect(knn1.predict(x).label == testing::knn_oracle(data, x, 1).label,
                     "1NN disagrees with the oracle");
            c.expect(knn3.predict(x).label == testing::knn_oracle(data, x, 3).label,
                     "3NN disagrees with the oracle");
            c.expect(knn5.predict(x).label == testing::knn_oracle(data, x, 5).label,
                     "5NN disagrees with the oracle");
            c.expect(dt.predict(x).label == testing::dt_oracle(data, x).label,
                     "DT disagrees with the oracle");
            ++checked;
        }
    }
    c.expect(checked == 2000, "probe count mismatch");
    c.finish();
}

// Shared sweep results for criteria 5 and 6, averaged over three seeds.
struct DirectionalResults {
    // key: (model, ratio, attack) -> seed-averaged metric
    std::map<std::string, double> recall;  // feature-mode-qualified keys
    std::map<std::string, double> er;
};

std::string key(const std::string& mode, const std::string& model, double ratio,
                const std::string& attack) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s/%s/%.1f/%s", mode.c_str(), model.c_str(), ratio,
                  attack.c_str());
    return buf;
}

DirectionalResults run_directional_sweeps() {
    DirectionalResults out;
    std::map<std::string, double> recall_sum, er_sum;
    std::map<std::string, int> counts;

    const std::vector<std::uint64_t> seeds = {11, 22, 33};
    for (std::uint64_t seed : seeds) {
        CorpusSpec spec;
        spec.benign_count = 2000;
        spec.malicious_count = 200;
        spec.seed = seed;
        auto corpus = generate_corpus(spec);

        auto accumulate = [&](FeatureMode mode, const std::vector<ModelKind>& models,
                              const std::vector<AttackCase>& attacks,
                              const std::vector<double>& ratios) {
            ExperimentPlan plan;
            plan.corpus = spec;
            plan.models = models;
            plan.attacks = attacks;
            plan.ratios = ratios;
            plan.folds = 5;
            plan.feature_mode = mode;
            plan.seed = seed;
            plan.threads = 4;
            ExperimentResult result = run_experiment(plan, corpus);
            for (const auto& rep : result.aggregated) {
                std::string k = key(feature_mode_name(mode), rep.model, rep.ratio,
                                    rep.attack);
                recall_sum[k] += rep.recall;
                er_sum[k] += rep.er;
                counts[k] += 1;
            }
        };

        // Base features: DT for the recall criteria, kNN for the ratio-shape
        // criterion (clean at both ratios, attacks at ratio 1.0).
        accumulate(FeatureMode::kBase,
                   {ModelKind::kDecisionTree, ModelKind::k1NN, ModelKind::k3NN,
                    ModelKind::k5NN},
                   {AttackCase::kNone, AttackCase::kRandomStB, AttackCase::kFullStB,
                    AttackCase::kBlackHoleStB},
                   {0.1, 1.0});
        // Ext (fused) features at ratio 1.0 under every attack case.
        accumulate(FeatureMode::kExt, {ModelKind::kDecisionTree},
                   {AttackCase::kNone, AttackCase::kRandomStB, AttackCase::kFullStB,
                    AttackCase::kBlackHoleStB, AttackCase::kPermPerturb},
                   {1.0});
        // Permission-only features under the permission adversary.
        accumulate(FeatureMode::kPerm, {ModelKind::kDecisionTree},
                   {AttackCase::kNone, AttackCase::kPermPerturb}, {1.0});
    }

    for (const auto& [k, v] : recall_sum) out.recall[k] = v / counts[k];
    for (const auto& [k, v] : er_sum) out.er[k] = v / counts[k];
    if (std::getenv("DROIDMARK_DUMP_SWEEPS")) {
        for (const auto& [k, v] : out.recall)
            std::printf("  %-45s recall=%.4f er=%.4f\n", k.c_str(), v, out.er.at(k));
    }
    return out;
}

void criterion_5_directional(const DirectionalResults& r) {
    Criterion c("criterion 5: directional reproduction on the 2000/200 corpus");

    double base_clean = r.recall.at(key("base", "dt", 1.0, "none"));
    double base_full = r.recall.at(key("base", "dt", 1.0, "full_statistical"));
    double base_random = r.recall.at(key("base", "dt", 1.0, "random"));
    double base_hole = r.recall.at(key("base", "dt", 1.0, "black_hole"));
    double ext_random = r.recall.at(key("ext", "dt", 1.0, "random"));
    double ext_full = r.recall.at(key("ext", "dt", 1.0, "full_statistical"));
    double ext_hole = r.recall.at(key("ext", "dt", 1.0, "black_hole"));
    double ext_perturb = r.recall.at(key("ext", "dt", 1.0, "permission_perturb"));
    double perm_perturb = r.recall.at(key("perm", "dt", 1.0, "permission_perturb"));

    c.expect(base_clean >= 0.80,
             "(a) DT clean recall " + fmt(base_clean) + " < 0.80");
    c.expect(base_clean - base_full >= 0.30,
             "(b) full-statistical recall drop " + fmt(base_clean - base_full) +
                 " < 0.30 (clean " + fmt(base_clean) + ", attacked " + fmt(base_full) + ")");
    c.expect(ext_random >= 0.85, "(c) Ext recall under random " + fmt(ext_random) + " < 0.85");
    c.expect(ext_full >= 0.85,
             "(c) Ext recall under full_statistical " + fmt(ext_full) + " < 0.85");
    c.expect(ext_hole >= 0.85, "(c) Ext recall under black_hole " + fmt(ext_hole) + " < 0.85");
    c.expect(ext_random - base_random >= 0.30,
             "(c) Ext-vs-Base margin under random " + fmt(ext_random - base_random) + " < 0.30");
    c.expect(ext_full - base_full >= 0.30,
             "(c) Ext-vs-Base margin under full_statistical " + fmt(ext_full - base_full) +
                 " < 0.30");
    c.expect(ext_hole - base_hole >= 0.30,
             "(c) Ext-vs-Base margin under black_hole " + fmt(ext_hole - base_hole) + " < 0.30");
    c.expect(perm_perturb < 0.5,
             "(d) Perm-only recall under perturb " + fmt(perm_perturb) + " >= 0.5");
    c.expect(ext_perturb >= 0.85,
             "(d) Ext recall under perturb " + fmt(ext_perturb) + " < 0.85");
    c.finish();
}

void criterion_6_ratio_shape(const DirectionalResults& r) {
    Criterion c("criterion 6: kNN ratio shape and distance-model attack stability");

    for (const char* model : {"1nn", "3nn", "5nn"}) {
        double er_full = r.er.at(key("base", model, 1.0, "none"));
        double er_tenth = r.er.at(key("base", model, 0.1, "none"));
        c.expect(er_full <= er_tenth + 1e-9,
                 std::string(model) + " clean ER at 100% (" + fmt(er_full) +
                     ") exceeds ER at 10% (" + fmt(er_tenth) + ")");
        for (const char* attack : {"random", "full_statistical", "black_hole"}) {
            double er_attacked = r.er.at(key("base", model, 1.0, attack));
            c.expect(std::abs(er_full - er_attacked) < 0.10,
                     std::string(model) + " ER shift under " + attack + " is " +
                         fmt(std::abs(er_full - er_attacked)) + " >= 0.10");
        }
    }
    c.finish();
}

void criterion_7_determinism() {
    Criterion c("criterion 7: byte-identical sweep outputs, including parallel runs");

    ExperimentPlan plan;
    plan.corpus.benign_count = 300;
    plan.corpus.malicious_count = 60;
    plan.corpus.seed = 404;
    plan.models = {ModelKind::k1NN, ModelKind::k3NN, ModelKind::k5NN,
                   ModelKind::kDecisionTree, ModelKind::kRandomForest,
                   ModelKind::kAdaBoost};
    plan.attacks = {AttackCase::kNone, AttackCase::kRandomStB, AttackCase::kFullStB,
                    AttackCase::kBlackHoleStB, AttackCase::kPermPerturb};
    plan.ratios = {0.5, 1.0};
    plan.folds = 5;
    plan.feature_mode = FeatureMode::kExt;
    plan.seed = 404;

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    };

    fs::path base = fs::temp_directory_path() / "droidmark_acceptance";
    fs::remove_all(base);
    std::vector<std::string> metrics, per_fold, reports;
    for (int run = 0; run < 3; ++run) {
        plan.out_dir = base / ("run" + std::to_string(run));
        plan.threads = run == 0 ? 1 : 4;
        run_experiment(plan);
        metrics.push_back(slurp(plan.out_dir / "metrics.csv"));
        per_fold.push_back(slurp(plan.out_dir / "metrics_per_fold.csv"));
        reports.push_back(slurp(plan.out_dir / "attack_reports.csv"));
    }
    c.expect(!metrics[0].empty(), "metrics.csv is empty");
    c.expect(metrics[0] == metrics[1] && metrics[1] == metrics[2],
             "metrics.csv differs across runs");
    c.expect(per_fold[0] == per_fold[1] && per_fold[1] == per_fold[2],
             "metrics_per_fold.csv differs across runs");
    c.expect(reports[0] == reports[1] && reports[1] == reports[2],
             "attack_reports.csv differs across runs");
    c.finish();
}

}  // namespace

int main() {
    criterion_1_metric_exactness();
    criterion_2_markov_properties();
    criterion_3_attack_correctness();
    criterion_4_oracle_equivalence();

    DirectionalResults r = run_directional_sweeps();
    criterion_5_directional(r);
    criterion_6_ratio_shape(r);
    criterion_7_determinism();

    if (g_failures == 0) std::printf("all acceptance criteria passed\n");
    else std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
