#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "droidmark/harness.hpp"

using namespace droidmark;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
    fs::path p = fs::temp_directory_path() / (std::string("droidmark_harness_") + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<Label> make_labels(int benign, int malicious) {
    std::vector<Label> labels(benign, Label::kBenign);
    labels.insert(labels.end(), malicious, Label::kMalicious);
    return labels;
}

}  // namespace

TEST_CASE("kfold_split stratifies and partitions") {
    auto labels = make_labels(5, 5);
    auto folds = kfold_split(labels, 5, 1);
    REQUIRE(folds.size() == 10);
    // each fold holds exactly one of each class
    for (int f = 0; f < 5; ++f) {
        int benign = 0, malicious = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (folds[i] != f) continue;
            (labels[i] == Label::kBenign ? benign : malicious)++;
        }
        CHECK(benign == 1);
        CHECK(malicious == 1);
    }

    // determinism
    CHECK(kfold_split(labels, 5, 1) == folds);
    CHECK(kfold_split(labels, 5, 2) != folds);

    // class proportions within one sample for uneven sizes
    auto labels2 = make_labels(103, 17);
    auto folds2 = kfold_split(labels2, 5, 3);
    for (int f = 0; f < 5; ++f) {
        int benign = 0, malicious = 0;
        for (std::size_t i = 0; i < labels2.size(); ++i) {
            if (folds2[i] != f) continue;
            (labels2[i] == Label::kBenign ? benign : malicious)++;
        }
        CHECK(benign >= 20);
        CHECK(benign <= 21);
        CHECK(malicious >= 3);
        CHECK(malicious <= 4);
    }
}

TEST_CASE("kfold_split preconditions") {
    auto labels = make_labels(10, 3);
    CHECK_THROWS_AS(kfold_split(labels, 4, 1), std::invalid_argument);  // k > min class
    CHECK_THROWS_AS(kfold_split(labels, 1, 1), std::invalid_argument);
    CHECK_NOTHROW(kfold_split(labels, 3, 1));
}

TEST_CASE("subsample_benign keeps all malicious and floor(ratio*n) benign") {
    auto labels = make_labels(20, 6);
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < labels.size(); ++i) train.push_back(i);

    auto full = subsample_benign(train, labels, 1.0, 1);
    CHECK(full.size() == 26);

    auto half = subsample_benign(train, labels, 0.5, 1);
    CHECK(half.size() == 16);  // 10 benign + 6 malicious
    int malicious = 0;
    for (auto i : half) malicious += labels[i] == Label::kMalicious;
    CHECK(malicious == 6);

    // different seeds: different benign subsets, same malicious set
    auto a = subsample_benign(train, labels, 0.5, 1);
    auto b = subsample_benign(train, labels, 0.5, 2);
    std::set<std::size_t> mal_a, mal_b, ben_a, ben_b;
    for (auto i : a) (labels[i] == Label::kMalicious ? mal_a : ben_a).insert(i);
    for (auto i : b) (labels[i] == Label::kMalicious ? mal_b : ben_b).insert(i);
    CHECK(mal_a == mal_b);
    CHECK(ben_a != ben_b);

    // a ratio that strands zero benign apps is an error
    CHECK_THROWS_AS(subsample_benign(train, labels, 0.01, 1), std::invalid_argument);
}

TEST_CASE("feature CSV round trip") {
    fs::path file = temp_dir("csv") / "features.csv";
    std::vector<std::string> names = {"f1", "f2"};
    std::vector<std::string> ids = {"app_0", "app_1"};
    std::vector<Label> labels = {Label::kBenign, Label::kMalicious};
    std::vector<std::vector<double>> rows = {{0.5, 0.0}, {1.0 / 3.0, 1.0}};
    write_feature_csv(file, names, ids, labels, rows);

    FeatureCsv back = read_feature_csv(file);
    CHECK(back.feature_names == names);
    CHECK(back.app_ids == ids);
    CHECK(back.labels == labels);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0] == rows[0]);
    CHECK(back.rows[1][0] == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("corpus write/read round trip") {
    CorpusSpec spec;
    spec.benign_count = 6;
    spec.malicious_count = 4;
    spec.seed = 12;
    auto corpus = generate_corpus(spec);
    fs::path dir = temp_dir("corpus");
    write_corpus(corpus, dir);
    auto back = read_corpus(dir);
    CHECK(back == corpus);
}

TEST_CASE("plan parsing") {
    fs::path file = temp_dir("plan") / "plan.cfg";
    {
        std::ofstream out(file);
        out << "benign_count = 30\n";
        out << "malicious_count = 10\n";
        out << "seed = 4\n";
        out << "models = dt,rf\n";
        out << "attacks = none,black_hole\n";
        out << "ratios = 0.5,1.0\n";
        out << "folds = 2\n";
        out << "feature_mode = ext\n";
        out << "threads = 3\n";
        out << "vocab_threshold = 0.2\n";
    }
    ExperimentPlan plan = parse_plan(file);
    CHECK(plan.corpus.benign_count == 30);
    CHECK(plan.corpus.malicious_count == 10);
    CHECK(plan.seed == 4);
    CHECK(plan.corpus.seed == 4);
    CHECK(plan.models ==
          std::vector<ModelKind>{ModelKind::kDecisionTree, ModelKind::kRandomForest});
    CHECK(plan.attacks ==
          std::vector<AttackCase>{AttackCase::kNone, AttackCase::kBlackHoleStB});
    CHECK(plan.ratios == std::vector<double>{0.5, 1.0});
    CHECK(plan.folds == 2);
    CHECK(plan.feature_mode == FeatureMode::kExt);
    CHECK(plan.threads == 3);
    CHECK(plan.vocab_threshold == 0.2);
}

TEST_CASE("plan validation") {
    ExperimentPlan plan;
    plan.ratios = {0.0};
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
    plan = ExperimentPlan{};
    plan.folds = 1;
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
    plan = ExperimentPlan{};
    CHECK_NOTHROW(plan.validate());
}

TEST_CASE("attack case and feature mode names") {
    CHECK(attack_case_from_name("none") == AttackCase::kNone);
    CHECK(attack_case_from_name("random") == AttackCase::kRandomStB);
    CHECK(attack_case_from_name("full_statistical") == AttackCase::kFullStB);
    CHECK(attack_case_from_name("black_hole") == AttackCase::kBlackHoleStB);
    CHECK(attack_case_from_name("permission_perturb") == AttackCase::kPermPerturb);
    CHECK(feature_mode_from_name("base") == FeatureMode::kBase);
    CHECK(feature_mode_from_name("ext") == FeatureMode::kExt);
    CHECK(feature_mode_from_name("perm") == FeatureMode::kPerm);
    CHECK_THROWS_AS(attack_case_from_name("bogus"), std::invalid_argument);
    CHECK_THROWS_AS(feature_mode_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("degenerate plan: single DT cell, ER equals malicious recall") {
    ExperimentPlan plan;
    plan.corpus.benign_count = 40;
    plan.corpus.malicious_count = 20;
    plan.corpus.seed = 3;
    plan.models = {ModelKind::kDecisionTree};
    plan.attacks = {AttackCase::kNone};
    plan.ratios = {1.0};
    plan.folds = 4;
    plan.seed = 3;

    ExperimentResult result = run_experiment(plan);
    REQUIRE(result.aggregated.size() == 1);
    const EvaluationReport& rep = result.aggregated[0];
    CHECK(rep.model == "dt");
    CHECK(rep.ratio == 1.0);
    CHECK(rep.attack == "none");
    CHECK(rep.er >= 0.0);
    CHECK(rep.er <= 1.0);
    REQUIRE(result.per_fold.size() == 4);
}

TEST_CASE("experiment grid shape and CSV determinism across thread counts") {
    ExperimentPlan plan;
    plan.corpus.benign_count = 40;
    plan.corpus.malicious_count = 16;
    plan.corpus.seed = 6;
    plan.models = {ModelKind::kDecisionTree, ModelKind::k1NN};
    plan.attacks = {AttackCase::kNone, AttackCase::kRandomStB, AttackCase::kPermPerturb};
    plan.ratios = {0.5, 1.0};
    plan.folds = 2;
    plan.feature_mode = FeatureMode::kExt;
    plan.seed = 6;

    fs::path out1 = temp_dir("exp1");
    fs::path out2 = temp_dir("exp2");
    plan.out_dir = out1;
    plan.threads = 1;
    ExperimentResult r1 = run_experiment(plan);
    plan.out_dir = out2;
    plan.threads = 4;
    ExperimentResult r2 = run_experiment(plan);

    CHECK(r1.aggregated.size() == 2 * 2 * 3);
    CHECK(r1.per_fold.size() == 2 * 2 * 3 * 2);
    CHECK(slurp(out1 / "metrics.csv") == slurp(out2 / "metrics.csv"));
    CHECK(slurp(out1 / "metrics_per_fold.csv") == slurp(out2 / "metrics_per_fold.csv"));
    CHECK(slurp(out1 / "attack_reports.csv") == slurp(out2 / "attack_reports.csv"));
    CHECK(!slurp(out1 / "metrics.csv").empty());
}

TEST_CASE("malicious training set is fixed across ratios within a fold") {
    // Re-derive the harness' own subsample for two ratios and compare the
    // malicious subsets; the public API contract is exposed through
    // subsample_benign's seed discipline.
    auto labels = make_labels(30, 10);
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < labels.size(); ++i) train.push_back(i);
    auto r1 = subsample_benign(train, labels, 0.3, 42);
    auto r2 = subsample_benign(train, labels, 0.9, 42);
    std::set<std::size_t> mal1, mal2;
    for (auto i : r1)
        if (labels[i] == Label::kMalicious) mal1.insert(i);
    for (auto i : r2)
        if (labels[i] == Label::kMalicious) mal2.insert(i);
    CHECK(mal1 == mal2);
}
