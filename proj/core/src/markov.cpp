#include "droidmark/markov.hpp"

#include <stdexcept>

namespace droidmark {

TransitionMatrix build_transition_matrix(const CallSequence& seq) {
    std::array<std::array<double, kFamilyCount>, kFamilyCount> counts{};
    for (const auto& method : seq.methods) {
        for (std::size_t i = 0; i + 1 < method.size(); ++i) {
            int s = static_cast<int>(method[i]);
            int d = static_cast<int>(method[i + 1]);
            counts[s][d] += 1.0;
        }
    }
    TransitionMatrix m;
    for (int s = 0; s < kFamilyCount; ++s) {
        double total = 0.0;
        for (int d = 0; d < kFamilyCount; ++d) total += counts[s][d];
        if (total == 0.0) continue;  // zero row: no outgoing transitions
        for (int d = 0; d < kFamilyCount; ++d) m.p[s][d] = counts[s][d] / total;
    }
    return m;
}

FeatureVector matrix_to_features(const TransitionMatrix& m) {
    FeatureVector v;
    v.reserve(kFamilyCount * kFamilyCount);
    for (int s = 0; s < kFamilyCount; ++s)
        for (int d = 0; d < kFamilyCount; ++d) v.push_back(m.p[s][d]);
    return v;
}

TransitionMatrix features_to_matrix(const FeatureVector& v) {
    if (v.size() != kFamilyCount * kFamilyCount)
        throw std::invalid_argument("feature vector must have length " +
                                    std::to_string(kFamilyCount * kFamilyCount));
    TransitionMatrix m;
    for (int s = 0; s < kFamilyCount; ++s)
        for (int d = 0; d < kFamilyCount; ++d)
            m.p[s][d] = v[static_cast<std::size_t>(s) * kFamilyCount + d];
    return m;
}

const std::vector<std::string>& markov_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        out.reserve(kFamilyCount * kFamilyCount);
        for (int s = 0; s < kFamilyCount; ++s)
            for (int d = 0; d < kFamilyCount; ++d)
                out.push_back(std::string(family_names()[s]) + "To" +
                              std::string(family_names()[d]));
        return out;
    }();
    return names;
}

}  // namespace droidmark
