#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "droidmark/bundle.hpp"

// The six classifiers, implemented from first principles so the
// probability shapes (binary DT/1NN leaves, near-0.5 AdaBoost margins)
// match what the evaluation metrics measure.

namespace droidmark {

enum class ModelKind { k1NN, k3NN, k5NN, kDecisionTree, kRandomForest, kAdaBoost };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

struct LabeledSample {
    std::vector<double> x;
    Label y = Label::kBenign;
};

using LabeledDataset = std::vector<LabeledSample>;

struct Prediction {
    Label label = Label::kBenign;
    double p_malicious = 0.0;
    double p_benign = 1.0;

    double p_of(Label l) const {
        return l == Label::kMalicious ? p_malicious : p_benign;
    }
};

// Binary CART node; leaves store raw class counts.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int n_malicious = 0;
    int n_benign = 0;
    std::unique_ptr<TreeNode> left;   // x[feature] <= threshold
    std::unique_ptr<TreeNode> right;
};

struct Stump {
    int feature = 0;
    double threshold = 0.0;
    Label left_label = Label::kBenign;  // label for x[feature] <= threshold
    double alpha = 0.0;
};

class TrainedModel {
public:
    ModelKind kind() const { return kind_; }
    std::size_t dimension() const { return dimension_; }

    // Throws std::invalid_argument on a dimension mismatch.
    Prediction predict(const std::vector<double>& x) const;

    void save(const std::filesystem::path& path) const;
    static TrainedModel load(const std::filesystem::path& path);

private:
    friend TrainedModel fit(ModelKind, const LabeledDataset&, std::uint64_t,
                            const struct ModelParams&);

    ModelKind kind_ = ModelKind::k1NN;
    std::size_t dimension_ = 0;

    LabeledDataset train_;  // kNN stores the train set
    int k_ = 1;

    std::unique_ptr<TreeNode> tree_;               // DT
    std::vector<std::unique_ptr<TreeNode>> forest_; // RF
    std::vector<Stump> stumps_;                    // AdaBoost
};

// Hyperparameters (the source material gives none; conventional defaults):
// DT: Gini impurity, midpoint thresholds, grown to purity, no depth cap.
// RF: 100 trees, bootstrap samples, ceil(sqrt(d)) features per node.
// AdaBoost: 50 rounds of depth-1 stumps, discrete boosting updates;
// probability is the normalized signed margin mapped to [0,1].
struct ModelParams {
    int forest_trees = 100;
    int boost_rounds = 50;
    // disabling both reduces a 1-tree forest to the plain decision tree
    bool rf_bootstrap = true;
    bool rf_feature_subsample = true;
};

// Throws std::invalid_argument if the training set holds a single class.
TrainedModel fit(ModelKind kind, const LabeledDataset& train,
                 std::uint64_t seed, const ModelParams& params = {});

}  // namespace droidmark
