#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "droidmark/bundle.hpp"
#include "droidmark/markov.hpp"

// Permission fusion: frequency-filtered permission vocabulary and the
// merged Markov + permission feature vector.

namespace droidmark {

struct PermissionVocabulary {
    std::vector<std::string> names;  // lexicographic, stable
    double threshold = 0.10;
    // request frequency among benign / malicious apps, aligned with names
    std::vector<double> benign_freq;
    std::vector<double> malicious_freq;

    int index_of(const std::string& permission) const;  // -1 if absent
};

// A permission is retained iff its request frequency exceeds the threshold
// in the benign class OR the malicious class (rare-but-malicious-typical
// permissions are the discriminative signal). Threshold must lie in (0,1).
PermissionVocabulary build_permission_vocab(
    const std::vector<std::pair<AppBundle, Label>>& corpus, double threshold = 0.10);

// Binary indicator per vocabulary entry.
std::vector<double> extract_permission_features(const AppBundle& bundle,
                                                const PermissionVocabulary& vocab);

// Concatenation, Markov block first. Throws on a dimension mismatch.
std::vector<double> merge_features(const FeatureVector& markov,
                                   const std::vector<double>& perms);

// One permission per line after a header line carrying the threshold and a
// corpus content hash.
void write_vocab(const PermissionVocabulary& vocab, std::uint64_t corpus_hash,
                 const std::filesystem::path& path);
PermissionVocabulary read_vocab(const std::filesystem::path& path);

// FNV-1a over the sorted per-app permission sets; pins vocabulary files to
// the corpus they came from.
std::uint64_t corpus_permission_hash(
    const std::vector<std::pair<AppBundle, Label>>& corpus);

}  // namespace droidmark
