#pragma once

#include <array>
#include <string>
#include <vector>

#include "droidmark/abstraction.hpp"

// Per-app Markov chain over families, flattened row-major into the
// feature vector.

namespace droidmark {

struct TransitionMatrix {
    // row = source family, column = destination family
    std::array<std::array<double, kFamilyCount>, kFamilyCount> p{};

    double at(Family src, Family dst) const {
        return p[static_cast<int>(src)][static_cast<int>(dst)];
    }
};

using FeatureVector = std::vector<double>;  // length kFamilyCount^2

// entry(s,d) = adjacent (s,d) pairs across all method sequences divided by
// the total outgoing count of s; rows with no outgoing transitions stay
// all-zero (never smoothed: zero rows are what the black-hole attack
// exploits).
TransitionMatrix build_transition_matrix(const CallSequence& seq);

// Row-major flattening; feature `androidTojava` holds m(android, java).
FeatureVector matrix_to_features(const TransitionMatrix& m);

TransitionMatrix features_to_matrix(const FeatureVector& v);

// The 121 `<src>To<dst>` names in row-major index order.
const std::vector<std::string>& markov_feature_names();

}  // namespace droidmark
