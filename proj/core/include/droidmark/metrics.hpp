#pragma once

#include <string>
#include <vector>

#include "droidmark/models.hpp"

// Evaluation metrics: evasion robustness (TPR on malicious samples),
// defense reciprocal rank, model reliability, recall and F1.

namespace droidmark {

// Per-sample record: probability assigned to the true class and the rank
// (1 or 2) of the true class in the ordered prediction list. At the 0.5
// boundary the rank follows the model's own tie rule: rank 1 iff the
// predicted label equals the true label.
struct RankedPrediction {
    double p_true = 0.0;  // in [0,1]
    int rank = 1;         // 1 or 2
};

RankedPrediction make_ranked(Label true_label, const Prediction& pred);

struct SampleRecord {
    Label true_label = Label::kMalicious;
    Prediction pred;
};

using EvaluationSet = std::vector<SampleRecord>;

struct EvaluationReport {
    std::string model;
    double ratio = 1.0;
    std::string attack;
    double er = 0.0;
    double drr = 0.0;
    double reliability = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Fraction of an all-malicious set predicted malicious. Throws on empty.
double evasion_robustness(const EvaluationSet& malicious_set);

// p_true/(rank+1) + 1/(rank+1); in [1/3, 1] for rank in {1,2}.
double drr_sample(const RankedPrediction& rp);

// Mean of drr_sample over the set. Throws on empty.
double drr_overall(const EvaluationSet& set);

// Binary Shannon entropy in nats, with 0*ln 0 := 0. Natural log: base 2
// would put reliability near 0 for probabilities near 0.5 instead of the
// observed ~0.3 plateau (1 - ln 2).
double sample_entropy(double p_target);

// 1 - mean per-sample entropy. Throws on empty.
double model_reliability(const EvaluationSet& set);

// Malicious is the positive class; both metrics are 0 when their
// denominator is 0.
std::pair<double, double> recall_f1(const EvaluationSet& mixed_set);

std::string metrics_csv_header();
std::string metrics_csv_row(const EvaluationReport& r);

}  // namespace droidmark
