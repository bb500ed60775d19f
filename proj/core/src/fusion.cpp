#include "droidmark/fusion.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace droidmark {

int PermissionVocabulary::index_of(const std::string& permission) const {
    auto it = std::lower_bound(names.begin(), names.end(), permission);
    if (it == names.end() || *it != permission) return -1;
    return static_cast<int>(it - names.begin());
}

PermissionVocabulary build_permission_vocab(
    const std::vector<std::pair<AppBundle, Label>>& corpus, double threshold) {
    if (corpus.empty()) throw std::invalid_argument("empty corpus");
    if (threshold <= 0.0 || threshold >= 1.0)
        throw std::invalid_argument("threshold must lie in (0,1)");

    std::map<std::string, std::pair<int, int>> counts;  // perm -> (benign, malicious)
    int n_benign = 0, n_malicious = 0;
    for (const auto& [bundle, label] : corpus) {
        (label == Label::kBenign ? n_benign : n_malicious) += 1;
        for (const auto& perm : bundle.manifest.permissions) {
            auto& c = counts[perm];
            (label == Label::kBenign ? c.first : c.second) += 1;
        }
    }

    PermissionVocabulary vocab;
    vocab.threshold = threshold;
    for (const auto& [perm, c] : counts) {  // std::map: lexicographic, stable
        double bf = n_benign > 0 ? static_cast<double>(c.first) / n_benign : 0.0;
        double mf = n_malicious > 0 ? static_cast<double>(c.second) / n_malicious : 0.0;
        if (bf > threshold || mf > threshold) {
            vocab.names.push_back(perm);
            vocab.benign_freq.push_back(bf);
            vocab.malicious_freq.push_back(mf);
        }
    }
    return vocab;
}

std::vector<double> extract_permission_features(const AppBundle& bundle,
                                                const PermissionVocabulary& vocab) {
    std::vector<double> out(vocab.names.size(), 0.0);
    for (std::size_t i = 0; i < vocab.names.size(); ++i)
        if (bundle.manifest.permissions.contains(vocab.names[i])) out[i] = 1.0;
    return out;
}

std::vector<double> merge_features(const FeatureVector& markov,
                                   const std::vector<double>& perms) {
    if (markov.size() != static_cast<std::size_t>(kFamilyCount) * kFamilyCount)
        throw std::invalid_argument("markov block has wrong length");
    std::vector<double> out;
    out.reserve(markov.size() + perms.size());
    out.insert(out.end(), markov.begin(), markov.end());
    out.insert(out.end(), perms.begin(), perms.end());
    return out;
}

std::uint64_t corpus_permission_hash(
    const std::vector<std::pair<AppBundle, Label>>& corpus) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= '\n';
        h *= 0x100000001b3ULL;
    };
    for (const auto& [bundle, label] : corpus) {
        feed(label_name(label));
        for (const auto& perm : bundle.manifest.permissions) feed(perm);
    }
    return h;
}

void write_vocab(const PermissionVocabulary& vocab, std::uint64_t corpus_hash,
                 const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# threshold=" << vocab.threshold << " corpus=" << std::hex << corpus_hash
        << std::dec << "\n";
    for (const auto& name : vocab.names) out << name << "\n";
}

PermissionVocabulary read_vocab(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    PermissionVocabulary vocab;
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("# threshold="))
        throw std::runtime_error("missing vocabulary header in " + path.string());
    std::istringstream header(line.substr(12));
    header >> vocab.threshold;
    while (std::getline(in, line))
        if (!line.empty()) vocab.names.push_back(line);
    if (!std::is_sorted(vocab.names.begin(), vocab.names.end()))
        throw std::runtime_error("vocabulary not in lexicographic order");
    vocab.benign_freq.assign(vocab.names.size(), 0.0);
    vocab.malicious_freq.assign(vocab.names.size(), 0.0);
    return vocab;
}

}  // namespace droidmark
