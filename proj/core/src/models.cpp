#include "droidmark/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace droidmark {

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::k1NN: return "1nn";
        case ModelKind::k3NN: return "3nn";
        case ModelKind::k5NN: return "5nn";
        case ModelKind::kDecisionTree: return "dt";
        case ModelKind::kRandomForest: return "rf";
        case ModelKind::kAdaBoost: return "adaboost";
    }
    return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "1nn") return ModelKind::k1NN;
    if (name == "3nn") return ModelKind::k3NN;
    if (name == "5nn") return ModelKind::k5NN;
    if (name == "dt") return ModelKind::kDecisionTree;
    if (name == "rf") return ModelKind::kRandomForest;
    if (name == "adaboost") return ModelKind::kAdaBoost;
    throw std::invalid_argument("unknown model kind: " + name);
}

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

double gini(int n_mal, int n_ben) {
    int n = n_mal + n_ben;
    if (n == 0) return 0.0;
    double pm = static_cast<double>(n_mal) / n;
    double pb = static_cast<double>(n_ben) / n;
    return 1.0 - pm * pm - pb * pb;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

// Best Gini split over the given features; midpoint thresholds. Ties go to
// the lowest feature index, then the lowest threshold.
SplitChoice find_split(const LabeledDataset& data,
                       const std::vector<std::size_t>& idx,
                       const std::vector<int>& features) {
    SplitChoice best;
    int total_mal = 0;
    for (auto i : idx) total_mal += data[i].y == Label::kMalicious;
    int total = static_cast<int>(idx.size());
    int total_ben = total - total_mal;
    if (total_mal == 0 || total_ben == 0) return best;

    std::vector<std::size_t> order(idx);
    for (int feat : features) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return data[a].x[feat] < data[b].x[feat];
        });
        int left_mal = 0, left_n = 0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            left_mal += data[order[k]].y == Label::kMalicious;
            ++left_n;
            double v = data[order[k]].x[feat];
            double v_next = data[order[k + 1]].x[feat];
            if (v == v_next) continue;
            int right_n = total - left_n;
            double w_left = static_cast<double>(left_n) / total;
            double impurity =
                w_left * gini(left_mal, left_n - left_mal) +
                (1.0 - w_left) * gini(total_mal - left_mal, right_n - (total_mal - left_mal));
            double thr = v + (v_next - v) / 2.0;
            if (impurity < best.impurity ||
                (impurity == best.impurity &&
                 (feat < best.feature || (feat == best.feature && thr < best.threshold)))) {
                best = {feat, thr, impurity};
            }
        }
    }
    // Reject splits that do not reduce impurity (identical points of mixed
    // label end up in one leaf with fractional frequencies).
    if (best.feature >= 0 && best.impurity >= gini(total_mal, total_ben)) best.feature = -1;
    return best;
}

std::unique_ptr<TreeNode> grow_tree(const LabeledDataset& data,
                                    std::vector<std::size_t> idx,
                                    std::mt19937_64* feature_rng, int n_features) {
    auto node = std::make_unique<TreeNode>();
    for (auto i : idx) {
        node->n_malicious += data[i].y == Label::kMalicious;
        node->n_benign += data[i].y == Label::kBenign;
    }
    if (node->n_malicious == 0 || node->n_benign == 0) return node;

    std::vector<int> features;
    if (feature_rng) {
        // per-node feature subsample of ceil(sqrt(d))
        int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features))));
        std::vector<int> all(n_features);
        std::iota(all.begin(), all.end(), 0);
        for (int i = 0; i < m; ++i) {
            std::size_t j = i + (*feature_rng)() % (all.size() - i);
            std::swap(all[i], all[j]);
        }
        features.assign(all.begin(), all.begin() + m);
        std::sort(features.begin(), features.end());
    } else {
        features.resize(n_features);
        std::iota(features.begin(), features.end(), 0);
    }

    SplitChoice split = find_split(data, idx, features);
    if (split.feature < 0) {
        if (feature_rng) {
            // the random subset may miss every informative feature; retry with all
            std::vector<int> all(n_features);
            std::iota(all.begin(), all.end(), 0);
            split = find_split(data, idx, all);
        }
        if (split.feature < 0) return node;  // unsplittable mixed leaf
    }

    std::vector<std::size_t> left, right;
    for (auto i : idx)
        (data[i].x[split.feature] <= split.threshold ? left : right).push_back(i);
    node->feature = split.feature;
    node->threshold = split.threshold;
    node->left = grow_tree(data, std::move(left), feature_rng, n_features);
    node->right = grow_tree(data, std::move(right), feature_rng, n_features);
    return node;
}

const TreeNode* descend(const TreeNode* node, const std::vector<double>& x) {
    while (node->feature >= 0)
        node = x[node->feature] <= node->threshold ? node->left.get() : node->right.get();
    return node;
}

// Weighted-error-minimizing stump over all features/thresholds/polarities.
Stump fit_stump(const LabeledDataset& data, const std::vector<double>& weights) {
    const std::size_t n = data.size();
    const std::size_t d = data[0].x.size();
    Stump best;
    double best_err = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(n);
    for (std::size_t feat = 0; feat < d; ++feat) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return data[a].x[feat] < data[b].x[feat];
        });
        // err(left=mal) at the empty-left split
        double err_left_mal = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (data[i].y == Label::kMalicious) err_left_mal += weights[i];
        double cum = err_left_mal;
        // threshold below all points is not a real split; scan midpoints
        for (std::size_t k = 0; k + 1 < n; ++k) {
            std::size_t i = order[k];
            cum += data[i].y == Label::kMalicious ? -weights[i] : weights[i];
            double v = data[i].x[feat];
            double v_next = data[order[k + 1]].x[feat];
            if (v == v_next) continue;
            double thr = v + (v_next - v) / 2.0;
            for (int polarity = 0; polarity < 2; ++polarity) {
                double err = polarity == 0 ? cum : 1.0 - cum;
                if (err < best_err - 1e-12) {
                    best_err = err;
                    best.feature = static_cast<int>(feat);
                    best.threshold = thr;
                    best.left_label =
                        polarity == 0 ? Label::kMalicious : Label::kBenign;
                }
            }
        }
    }
    double err = std::clamp(best_err, 1e-10, 1.0 - 1e-10);
    best.alpha = 0.5 * std::log((1.0 - err) / err);
    return best;
}

Prediction make_prediction(double p_malicious) {
    Prediction p;
    p.p_malicious = p_malicious;
    p.p_benign = 1.0 - p_malicious;
    // vote/probability ties resolve to benign: a tie is not evidence of malice
    p.label = p_malicious > 0.5 ? Label::kMalicious : Label::kBenign;
    return p;
}

}  // namespace

TrainedModel fit(ModelKind kind, const LabeledDataset& train, std::uint64_t seed,
                 const ModelParams& params) {
    if (train.empty()) throw std::invalid_argument("empty training set");
    bool has_mal = false, has_ben = false;
    for (const auto& s : train) (s.y == Label::kMalicious ? has_mal : has_ben) = true;
    if (!has_mal || !has_ben)
        throw std::invalid_argument("training set holds a single class");
    const std::size_t d = train[0].x.size();
    for (const auto& s : train)
        if (s.x.size() != d)
            throw std::invalid_argument("inhomogeneous feature dimensions");

    TrainedModel model;
    model.kind_ = kind;
    model.dimension_ = d;
    const std::size_t n = train.size();
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);

    switch (kind) {
        case ModelKind::k1NN:
        case ModelKind::k3NN:
        case ModelKind::k5NN:
            model.k_ = kind == ModelKind::k1NN ? 1 : kind == ModelKind::k3NN ? 3 : 5;
            model.train_ = train;
            break;
        case ModelKind::kDecisionTree:
            model.tree_ = grow_tree(train, all, nullptr, static_cast<int>(d));
            break;
        case ModelKind::kRandomForest: {
            std::mt19937_64 rng(seed);
            for (int t = 0; t < params.forest_trees; ++t) {
                std::vector<std::size_t> boot;
                if (params.rf_bootstrap) {
                    boot.resize(n);
                    for (auto& i : boot) i = rng() % n;
                } else {
                    boot = all;
                }
                model.forest_.push_back(
                    grow_tree(train, std::move(boot),
                              params.rf_feature_subsample ? &rng : nullptr,
                              static_cast<int>(d)));
            }
            break;
        }
        case ModelKind::kAdaBoost: {
            std::vector<double> w(n, 1.0 / static_cast<double>(n));
            for (int round = 0; round < params.boost_rounds; ++round) {
                Stump stump = fit_stump(train, w);
                double err = 0.0;
                auto stump_label = [&](const std::vector<double>& x) {
                    bool left = x[stump.feature] <= stump.threshold;
                    return left ? stump.left_label
                                : (stump.left_label == Label::kMalicious
                                       ? Label::kBenign
                                       : Label::kMalicious);
                };
                for (std::size_t i = 0; i < n; ++i)
                    if (stump_label(train[i].x) != train[i].y) err += w[i];
                if (err >= 0.5) break;  // no weak learner left
                model.stumps_.push_back(stump);
                double alpha = stump.alpha;
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    bool correct = stump_label(train[i].x) == train[i].y;
                    w[i] *= std::exp(correct ? -alpha : alpha);
                    total += w[i];
                }
                for (auto& wi : w) wi /= total;
            }
            if (model.stumps_.empty()) model.stumps_.push_back(fit_stump(train, w));
            break;
        }
    }
    return model;
}

Prediction TrainedModel::predict(const std::vector<double>& x) const {
    if (x.size() != dimension_)
        throw std::invalid_argument("probe dimension mismatch");
    switch (kind_) {
        case ModelKind::k1NN:
        case ModelKind::k3NN:
        case ModelKind::k5NN: {
            // distance ties broken by train-set order: stable partial sort on
            // (distance, index)
            std::vector<std::pair<double, std::size_t>> dist(train_.size());
            for (std::size_t i = 0; i < train_.size(); ++i)
                dist[i] = {sq_distance(train_[i].x, x), i};
            int k = static_cast<int>(
                std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size()));
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            int votes = 0;
            for (int i = 0; i < k; ++i)
                votes += train_[dist[i].second].y == Label::kMalicious;
            return make_prediction(static_cast<double>(votes) / k);
        }
        case ModelKind::kDecisionTree: {
            const TreeNode* leaf = descend(tree_.get(), x);
            int total = leaf->n_malicious + leaf->n_benign;
            return make_prediction(static_cast<double>(leaf->n_malicious) / total);
        }
        case ModelKind::kRandomForest: {
            double p = 0.0;
            for (const auto& tree : forest_) {
                const TreeNode* leaf = descend(tree.get(), x);
                p += static_cast<double>(leaf->n_malicious) /
                     (leaf->n_malicious + leaf->n_benign);
            }
            return make_prediction(p / static_cast<double>(forest_.size()));
        }
        case ModelKind::kAdaBoost: {
            double margin = 0.0, total_alpha = 0.0;
            for (const auto& stump : stumps_) {
                bool left = x[stump.feature] <= stump.threshold;
                Label vote = left ? stump.left_label
                                  : (stump.left_label == Label::kMalicious
                                         ? Label::kBenign
                                         : Label::kMalicious);
                margin += vote == Label::kMalicious ? stump.alpha : -stump.alpha;
                total_alpha += std::abs(stump.alpha);
            }
            double m = total_alpha > 0.0 ? margin / total_alpha : 0.0;
            return make_prediction((m + 1.0) / 2.0);
        }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// line-oriented model dumps

namespace {

void dump_tree(const TreeNode* node, std::ostream& out) {
    if (node->feature < 0) {
        out << "leaf " << node->n_malicious << " " << node->n_benign << "\n";
        return;
    }
    out << "node " << node->feature << " ";
    out.precision(17);
    out << node->threshold << "\n";
    dump_tree(node->left.get(), out);
    dump_tree(node->right.get(), out);
}

std::unique_ptr<TreeNode> load_tree(std::istream& in) {
    std::string tag;
    if (!(in >> tag)) throw std::runtime_error("truncated model dump");
    auto node = std::make_unique<TreeNode>();
    if (tag == "leaf") {
        in >> node->n_malicious >> node->n_benign;
        return node;
    }
    if (tag != "node") throw std::runtime_error("bad model dump line: " + tag);
    in >> node->feature >> node->threshold;
    node->left = load_tree(in);
    node->right = load_tree(in);
    // replay counts so leaf distributions survive the round trip
    node->n_malicious = node->left->n_malicious + node->right->n_malicious;
    node->n_benign = node->left->n_benign + node->right->n_benign;
    return node;
}

}  // namespace

void TrainedModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "model " << model_kind_name(kind_) << " dim " << dimension_ << "\n";
    out.precision(17);
    switch (kind_) {
        case ModelKind::k1NN:
        case ModelKind::k3NN:
        case ModelKind::k5NN:
            // the train set itself, as an embedded feature CSV
            out << "k " << k_ << "\n";
            for (const auto& s : train_) {
                out << "row " << label_name(s.y);
                for (double v : s.x) out << "," << v;
                out << "\n";
            }
            break;
        case ModelKind::kDecisionTree:
            dump_tree(tree_.get(), out);
            break;
        case ModelKind::kRandomForest:
            out << "trees " << forest_.size() << "\n";
            for (const auto& tree : forest_) dump_tree(tree.get(), out);
            break;
        case ModelKind::kAdaBoost:
            out << "stumps " << stumps_.size() << "\n";
            for (const auto& s : stumps_)
                out << "stump " << s.feature << " " << s.threshold << " "
                    << label_name(s.left_label) << " " << s.alpha << "\n";
            break;
    }
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string tag, kind_name, dim_tag;
    std::size_t dim = 0;
    in >> tag >> kind_name >> dim_tag >> dim;
    if (tag != "model" || dim_tag != "dim")
        throw std::runtime_error("bad model dump header in " + path.string());
    TrainedModel model;
    model.kind_ = model_kind_from_name(kind_name);
    model.dimension_ = dim;
    switch (model.kind_) {
        case ModelKind::k1NN:
        case ModelKind::k3NN:
        case ModelKind::k5NN: {
            in >> tag >> model.k_;
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                if (!line.starts_with("row "))
                    throw std::runtime_error("bad knn dump line: " + line);
                std::istringstream row(line.substr(4));
                std::string field;
                std::getline(row, field, ',');
                LabeledSample s;
                s.y = field == "malicious" ? Label::kMalicious : Label::kBenign;
                while (std::getline(row, field, ',')) s.x.push_back(std::stod(field));
                model.train_.push_back(std::move(s));
            }
            break;
        }
        case ModelKind::kDecisionTree:
            model.tree_ = load_tree(in);
            break;
        case ModelKind::kRandomForest: {
            std::size_t count = 0;
            in >> tag >> count;
            for (std::size_t i = 0; i < count; ++i) model.forest_.push_back(load_tree(in));
            break;
        }
        case ModelKind::kAdaBoost: {
            std::size_t count = 0;
            in >> tag >> count;
            for (std::size_t i = 0; i < count; ++i) {
                Stump s;
                std::string label;
                in >> tag >> s.feature >> s.threshold >> label >> s.alpha;
                s.left_label = label == "malicious" ? Label::kMalicious : Label::kBenign;
                model.stumps_.push_back(s);
            }
            break;
        }
    }
    return model;
}

}  // namespace droidmark
