#include "droidmark/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace droidmark {

RankedPrediction make_ranked(Label true_label, const Prediction& pred) {
    RankedPrediction rp;
    rp.p_true = pred.p_of(true_label);
    // At exactly 0.5 the model's own tie rule decides the rank.
    rp.rank = pred.label == true_label ? 1 : 2;
    return rp;
}

double evasion_robustness(const EvaluationSet& malicious_set) {
    if (malicious_set.empty()) throw std::invalid_argument("empty evaluation set");
    int flagged = 0;
    for (const auto& rec : malicious_set)
        flagged += rec.pred.label == Label::kMalicious;
    return static_cast<double>(flagged) / static_cast<double>(malicious_set.size());
}

double drr_sample(const RankedPrediction& rp) {
    return rp.p_true / (rp.rank + 1) + 1.0 / (rp.rank + 1);
}

double drr_overall(const EvaluationSet& set) {
    if (set.empty()) throw std::invalid_argument("empty evaluation set");
    double sum = 0.0;
    for (const auto& rec : set)
        sum += drr_sample(make_ranked(rec.true_label, rec.pred));
    return sum / static_cast<double>(set.size());
}

double sample_entropy(double p_target) {
    if (p_target < 0.0 || p_target > 1.0)
        throw std::invalid_argument("probability out of [0,1]");
    auto term = [](double p) { return p > 0.0 ? -p * std::log(p) : 0.0; };
    return term(p_target) + term(1.0 - p_target);
}

double model_reliability(const EvaluationSet& set) {
    if (set.empty()) throw std::invalid_argument("empty evaluation set");
    double sum = 0.0;
    for (const auto& rec : set) sum += sample_entropy(rec.pred.p_malicious);
    return 1.0 - sum / static_cast<double>(set.size());
}

std::pair<double, double> recall_f1(const EvaluationSet& mixed_set) {
    if (mixed_set.empty()) throw std::invalid_argument("empty evaluation set");
    int tp = 0, fp = 0, fn = 0;
    for (const auto& rec : mixed_set) {
        bool pred_mal = rec.pred.label == Label::kMalicious;
        bool is_mal = rec.true_label == Label::kMalicious;
        tp += pred_mal && is_mal;
        fp += pred_mal && !is_mal;
        fn += !pred_mal && is_mal;
    }
    double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    double f1 = precision + recall > 0.0
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    return {recall, f1};
}

std::string metrics_csv_header() {
    return "model,ratio,attack,er,drr,reliability,recall,f1";
}

std::string metrics_csv_row(const EvaluationReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%s,%.9g,%.9g,%.9g,%.9g,%.9g",
                  r.model.c_str(), r.ratio, r.attack.c_str(), r.er, r.drr,
                  r.reliability, r.recall, r.f1);
    return buf;
}

}  // namespace droidmark
