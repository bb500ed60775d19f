#include "droidmark/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace droidmark {

namespace fs = std::filesystem;

const char* feature_mode_name(FeatureMode m) {
    switch (m) {
        case FeatureMode::kBase: return "base";
        case FeatureMode::kExt: return "ext";
        case FeatureMode::kPerm: return "perm";
    }
    return "?";
}

FeatureMode feature_mode_from_name(const std::string& name) {
    if (name == "base") return FeatureMode::kBase;
    if (name == "ext") return FeatureMode::kExt;
    if (name == "perm") return FeatureMode::kPerm;
    throw std::invalid_argument("unknown feature mode: " + name);
}

const char* attack_case_name(AttackCase c) {
    switch (c) {
        case AttackCase::kNone: return "none";
        case AttackCase::kRandomStB: return "random";
        case AttackCase::kFullStB: return "full_statistical";
        case AttackCase::kBlackHoleStB: return "black_hole";
        case AttackCase::kPermPerturb: return "permission_perturb";
    }
    return "?";
}

AttackCase attack_case_from_name(const std::string& name) {
    if (name == "none") return AttackCase::kNone;
    if (name == "random") return AttackCase::kRandomStB;
    if (name == "full_statistical") return AttackCase::kFullStB;
    if (name == "black_hole") return AttackCase::kBlackHoleStB;
    if (name == "permission_perturb") return AttackCase::kPermPerturb;
    throw std::invalid_argument("unknown attack case: " + name);
}

void ExperimentPlan::validate() const {
    corpus.validate();
    if (models.empty()) throw std::invalid_argument("no models in plan");
    if (attacks.empty()) throw std::invalid_argument("no attack cases in plan");
    if (folds < 2) throw std::invalid_argument("folds must be >= 2");
    for (double r : ratios)
        if (r <= 0.0 || r > 1.0)
            throw std::invalid_argument("ratios must lie in (0,1]");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<int> kfold_split(const std::vector<Label>& labels, int k,
                             std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    std::vector<std::size_t> benign, malicious;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == Label::kBenign ? benign : malicious).push_back(i);
    if (static_cast<std::size_t>(k) > std::min(benign.size(), malicious.size()))
        throw std::invalid_argument("k exceeds the smaller class count");

    std::vector<int> fold(labels.size(), 0);
    for (auto* cls : {&benign, &malicious}) {
        std::mt19937_64 rng(mix(seed, cls == &benign ? 0 : 1));
        auto& idx = *cls;
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            std::size_t j = i + rng() % (idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fold;
}

std::vector<std::size_t> subsample_benign(const std::vector<std::size_t>& train,
                                          const std::vector<Label>& labels,
                                          double ratio, std::uint64_t seed) {
    if (ratio <= 0.0 || ratio > 1.0)
        throw std::invalid_argument("ratio must lie in (0,1]");
    std::vector<std::size_t> benign, out;
    for (auto i : train) {
        if (labels[i] == Label::kBenign)
            benign.push_back(i);
        else
            out.push_back(i);  // malicious training apps are always kept
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i + 1 < benign.size(); ++i) {
        std::size_t j = i + rng() % (benign.size() - i);
        std::swap(benign[i], benign[j]);
    }
    auto keep = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(benign.size())));
    if (keep == 0) throw std::invalid_argument("no benign samples survive the ratio");
    out.insert(out.end(), benign.begin(), benign.begin() + keep);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct CellTaskResult {
    std::vector<CellResult> cells;
    std::string attack_report;
};

struct ExperimentContext {
    const ExperimentPlan& plan;
    const std::vector<std::pair<AppBundle, Label>>& corpus;
    std::vector<Label> labels;
    std::vector<std::string> app_ids;
    std::vector<FeatureVector> base_features;  // clean Markov features
    std::vector<int> fold;
};

std::vector<double> features_for(const ExperimentContext& ctx,
                                 const FeatureVector& markov,
                                 const AppBundle& bundle,
                                 const PermissionVocabulary& vocab) {
    switch (ctx.plan.feature_mode) {
        case FeatureMode::kBase: return markov;
        case FeatureMode::kExt:
            return merge_features(markov, extract_permission_features(bundle, vocab));
        case FeatureMode::kPerm: return extract_permission_features(bundle, vocab);
    }
    throw std::logic_error("unreachable");
}

// One (fold, ratio) slot: train once per model, evaluate every attack case.
CellTaskResult run_cell(const ExperimentContext& ctx, int fold_id, std::size_t ratio_idx) {
    const ExperimentPlan& plan = ctx.plan;
    double ratio = plan.ratios[ratio_idx];
    std::uint64_t cell_seed = mix(plan.seed, mix(fold_id + 1, ratio_idx + 1));

    std::vector<std::size_t> train_all, test_idx;
    for (std::size_t i = 0; i < ctx.labels.size(); ++i)
        (ctx.fold[i] == fold_id ? test_idx : train_all).push_back(i);
    // For one fold, the benign subsample depends only on the ratio, so the
    // malicious training set is identical across ratios by construction.
    auto train_idx =
        subsample_benign(train_all, ctx.labels, ratio, mix(plan.seed, fold_id + 1));

    PermissionVocabulary vocab;
    if (plan.feature_mode != FeatureMode::kBase) {
        std::vector<std::pair<AppBundle, Label>> train_corpus;
        for (auto i : train_idx) train_corpus.push_back(ctx.corpus[i]);
        vocab = build_permission_vocab(train_corpus, plan.vocab_threshold);
    }

    LabeledDataset train_set;
    train_set.reserve(train_idx.size());
    for (auto i : train_idx)
        train_set.push_back({features_for(ctx, ctx.base_features[i],
                                          ctx.corpus[i].first, vocab),
                             ctx.labels[i]});

    std::vector<TrainedModel> models;
    for (std::size_t m = 0; m < plan.models.size(); ++m)
        models.push_back(fit(plan.models[m], train_set, mix(cell_seed, m)));

    // Attacker statistics under each adversary's knowledge model: the
    // statistical attacker reads the training fold; the black-hole attacker
    // reads the malicious test fold it is attacking.
    CorpusStatistics stats;
    for (auto i : train_idx)
        (ctx.labels[i] == Label::kBenign ? stats.train_benign : stats.train_malicious)
            .push_back(ctx.base_features[i]);
    std::vector<std::size_t> test_malicious;
    for (auto i : test_idx)
        if (ctx.labels[i] == Label::kMalicious) {
            stats.test_malicious.push_back(ctx.base_features[i]);
            test_malicious.push_back(i);
        }

    std::vector<std::string> benign_profile;
    {
        int n_benign = 0;
        std::map<std::string, int> counts;
        for (auto i : train_idx) {
            if (ctx.labels[i] != Label::kBenign) continue;
            ++n_benign;
            for (const auto& p : ctx.corpus[i].first.manifest.permissions)
                counts[p] += 1;
        }
        for (const auto& [perm, c] : counts)
            if (c > plan.modal_threshold * n_benign) benign_profile.push_back(perm);
    }

    CellTaskResult result;
    std::ostringstream report;
    for (std::size_t a = 0; a < plan.attacks.size(); ++a) {
        AttackCase attack = plan.attacks[a];
        std::uint64_t attack_seed = mix(cell_seed, 1000 + a);

        // test features per app, attacked where malicious
        std::vector<std::vector<double>> test_features(ctx.labels.size());
        for (auto i : test_idx)
            test_features[i] = features_for(ctx, ctx.base_features[i],
                                            ctx.corpus[i].first, vocab);
        if (attack == AttackCase::kRandomStB || attack == AttackCase::kFullStB ||
            attack == AttackCase::kBlackHoleStB) {
            AttackVariant variant = attack == AttackCase::kRandomStB
                                        ? AttackVariant::kRandom
                                        : attack == AttackCase::kFullStB
                                              ? AttackVariant::kFullStatistical
                                              : AttackVariant::kBlackHole;
            AttackConfig cfg = make_variant_config(variant, stats, attack_seed);
            for (auto i : test_malicious) {
                AttackConfig app_cfg = cfg;
                app_cfg.seed = mix(attack_seed, i);
                AttackOutcome outcome = structure_break(ctx.corpus[i].first, app_cfg);
                FeatureVector markov = matrix_to_features(build_transition_matrix(
                    extract_call_sequences(outcome.bundle, ctx.app_ids[i])));
                test_features[i] =
                    features_for(ctx, markov, outcome.bundle, vocab);
                report << fold_id << ',' << ratio << ','
                       << attack_report_csv(ctx.app_ids[i], outcome, variant);
            }
        } else if (attack == AttackCase::kPermPerturb) {
            for (auto i : test_malicious) {
                AppBundle perturbed =
                    permission_perturb(ctx.corpus[i].first, benign_profile,
                                       plan.perturb_budget, mix(attack_seed, i));
                test_features[i] =
                    features_for(ctx, ctx.base_features[i], perturbed, vocab);
            }
        }

        for (std::size_t m = 0; m < plan.models.size(); ++m) {
            EvaluationSet malicious_set, mixed_set;
            for (auto i : test_idx) {
                SampleRecord rec{ctx.labels[i], models[m].predict(test_features[i])};
                if (rec.true_label == Label::kMalicious) malicious_set.push_back(rec);
                mixed_set.push_back(rec);
            }
            auto [recall, f1] = recall_f1(mixed_set);
            result.cells.push_back({plan.models[m], ratio, attack, fold_id,
                                    evasion_robustness(malicious_set),
                                    drr_overall(malicious_set),
                                    model_reliability(malicious_set), recall, f1});
        }
    }
    result.attack_report = report.str();
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan,
                                const std::vector<std::pair<AppBundle, Label>>& corpus) {
    plan.validate();
    ExperimentContext ctx{plan, corpus};
    ctx.labels.reserve(corpus.size());
    char buf[32];
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        ctx.labels.push_back(corpus[i].second);
        std::snprintf(buf, sizeof(buf), "app_%05zu", i);
        ctx.app_ids.emplace_back(buf);
    }
    ctx.base_features.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i)
        ctx.base_features.push_back(matrix_to_features(
            build_transition_matrix(extract_call_sequences(corpus[i].first,
                                                           ctx.app_ids[i]))));
    ctx.fold = kfold_split(ctx.labels, plan.folds, plan.seed);

    // independent (fold, ratio) tasks; results land in fixed slots so the
    // output is identical regardless of the thread count
    struct Task {
        int fold;
        std::size_t ratio_idx;
    };
    std::vector<Task> tasks;
    for (int f = 0; f < plan.folds; ++f)
        for (std::size_t r = 0; r < plan.ratios.size(); ++r) tasks.push_back({f, r});
    std::vector<CellTaskResult> slots(tasks.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) break;
            slots[t] = run_cell(ctx, tasks[t].fold, tasks[t].ratio_idx);
        }
    };
    if (plan.threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < plan.threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ExperimentResult result;
    for (const auto& slot : slots)
        result.per_fold.insert(result.per_fold.end(), slot.cells.begin(),
                               slot.cells.end());

    // fold-averaged report per (model, ratio, attack)
    std::map<std::tuple<int, std::size_t, int>, std::vector<const CellResult*>> groups;
    for (const auto& cell : result.per_fold) {
        auto r = std::find(plan.ratios.begin(), plan.ratios.end(), cell.ratio) -
                 plan.ratios.begin();
        groups[{static_cast<int>(cell.model), static_cast<std::size_t>(r),
                static_cast<int>(cell.attack)}]
            .push_back(&cell);
    }
    for (const auto& [key, cells] : groups) {
        EvaluationReport rep;
        rep.model = model_kind_name(cells.front()->model);
        rep.ratio = cells.front()->ratio;
        rep.attack = attack_case_name(cells.front()->attack);
        for (const auto* c : cells) {
            rep.er += c->er;
            rep.drr += c->drr;
            rep.reliability += c->reliability;
            rep.recall += c->recall;
            rep.f1 += c->f1;
        }
        double n = static_cast<double>(cells.size());
        rep.er /= n;
        rep.drr /= n;
        rep.reliability /= n;
        rep.recall /= n;
        rep.f1 /= n;
        result.aggregated.push_back(std::move(rep));
    }

    if (!plan.out_dir.empty()) {
        fs::create_directories(plan.out_dir);
        {
            std::ofstream out(plan.out_dir / "metrics.csv");
            out << metrics_csv_header() << "\n";
            for (const auto& rep : result.aggregated)
                out << metrics_csv_row(rep) << "\n";
        }
        {
            std::ofstream out(plan.out_dir / "metrics_per_fold.csv");
            out << "fold," << metrics_csv_header() << "\n";
            for (const auto& c : result.per_fold) {
                EvaluationReport rep{model_kind_name(c.model), c.ratio,
                                     attack_case_name(c.attack), c.er,
                                     c.drr, c.reliability, c.recall, c.f1};
                out << c.fold << ',' << metrics_csv_row(rep) << "\n";
            }
        }
        {
            std::ofstream out(plan.out_dir / "attack_reports.csv");
            out << "fold,ratio,app_id,variant,element,level,p,rewrites\n";
            for (const auto& slot : slots) out << slot.attack_report;
        }
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    return run_experiment(plan, generate_corpus(plan.corpus));
}

// ---------------------------------------------------------------------------
// corpus and CSV I/O

void write_corpus(const std::vector<std::pair<AppBundle, Label>>& corpus,
                  const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream labels(dir / "labels.csv");
    labels << "app_id,label\n";
    char buf[64];
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "app_%05zu", i);
        write_bundle(corpus[i].first, dir / buf);
        labels << buf << ',' << label_name(corpus[i].second) << "\n";
    }
}

std::vector<std::pair<AppBundle, Label>> read_corpus(const fs::path& dir) {
    std::ifstream labels(dir / "labels.csv");
    if (!labels) throw std::runtime_error("missing labels.csv in " + dir.string());
    std::vector<std::pair<AppBundle, Label>> corpus;
    std::string line;
    std::getline(labels, line);  // header
    while (std::getline(labels, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("bad labels.csv line: " + line);
        std::string app_id = line.substr(0, comma);
        Label label = line.substr(comma + 1) == "malicious" ? Label::kMalicious
                                                            : Label::kBenign;
        corpus.emplace_back(parse_bundle(dir / app_id), label);
    }
    return corpus;
}

void write_feature_csv(const fs::path& path,
                       const std::vector<std::string>& feature_names,
                       const std::vector<std::string>& app_ids,
                       const std::vector<Label>& labels,
                       const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "app_id,label";
    for (const auto& name : feature_names) out << ',' << name;
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << app_ids[i] << ',' << label_name(labels[i]);
        for (double v : rows[i]) {
            std::snprintf(buf, sizeof(buf), "%.9g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

FeatureCsv read_feature_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    FeatureCsv csv;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty feature CSV: " + path.string());
    std::istringstream header(line);
    std::string field;
    std::getline(header, field, ',');  // app_id
    std::getline(header, field, ',');  // label
    while (std::getline(header, field, ',')) csv.feature_names.push_back(field);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::getline(row, field, ',');
        csv.app_ids.push_back(field);
        std::getline(row, field, ',');
        csv.labels.push_back(field == "malicious" ? Label::kMalicious : Label::kBenign);
        std::vector<double> values;
        while (std::getline(row, field, ',')) values.push_back(std::stod(field));
        if (values.size() != csv.feature_names.size())
            throw std::runtime_error("ragged feature CSV row in " + path.string());
        csv.rows.push_back(std::move(values));
    }
    return csv;
}

ExperimentPlan parse_plan(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    ExperimentPlan plan;
    std::string line;
    int lineno = 0;
    auto split_list = [](const std::string& s) {
        std::vector<std::string> out;
        std::istringstream is(s);
        std::string item;
        while (std::getline(is, item, ','))
            if (!item.empty()) out.push_back(item);
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "models") {
            plan.models.clear();
            for (const auto& name : split_list(value))
                plan.models.push_back(model_kind_from_name(name));
        } else if (key == "attacks") {
            plan.attacks.clear();
            for (const auto& name : split_list(value))
                plan.attacks.push_back(attack_case_from_name(name));
        } else if (key == "ratios") {
            plan.ratios.clear();
            for (const auto& r : split_list(value)) plan.ratios.push_back(std::stod(r));
        } else if (key == "folds") {
            plan.folds = std::stoi(value);
        } else if (key == "feature_mode") {
            plan.feature_mode = feature_mode_from_name(value);
        } else if (key == "threads") {
            plan.threads = std::stoi(value);
        } else if (key == "vocab_threshold") {
            plan.vocab_threshold = std::stod(value);
        } else if (key == "modal_threshold") {
            plan.modal_threshold = std::stod(value);
        } else if (key == "perturb_budget") {
            plan.perturb_budget = std::stoi(value);
        } else if (key == "plan_seed") {
            plan.seed = std::stoull(value);
        } else if (set_corpus_key(plan.corpus, key, value)) {
            if (key == "seed") plan.seed = plan.corpus.seed;
        } else {
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": unknown key '" + key + "'");
        }
    }
    plan.validate();
    return plan;
}

}  // namespace droidmark
