#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "droidmark/bundle.hpp"
#include "droidmark/markov.hpp"

// Structure Break (StB) attack family: re-roots parts of an app's
// directory tree under a family-named directory and rewrites every
// reference, so internal calls abstract to a benign-looking family.

namespace droidmark {

enum class AttackVariant { kRandom, kFullStatistical, kBlackHole };

const char* attack_variant_name(AttackVariant v);

// L in [0, Height]: 0 selects the tree roots, 1 their children, and so on.
struct LevelPolicy {
    enum Kind { kFixed, kUniform } kind = kFixed;
    int fixed_value = 0;
    int produce(int height, std::mt19937_64& rng) const;
};

// P in [0,1]: fraction of level-L directories to move.
struct RatioPolicy {
    enum Kind { kFixed, kUniform } kind = kFixed;
    double fixed_value = 1.0;
    double produce(std::mt19937_64& rng) const;
};

struct AttackConfig {
    std::vector<Family> mode_elements;  // known families only, nonempty
    LevelPolicy level_policy;
    RatioPolicy ratio_policy;
    AttackVariant variant = AttackVariant::kRandom;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

// Ordered (old qualified prefix -> new qualified prefix) entries. Old
// prefixes are pairwise non-nested within one attack application, and
// applying the map is idempotent on already-rewritten names.
struct RewriteMap {
    std::vector<std::pair<std::string, std::string>> entries;

    // Rewrites `name` if it equals an old prefix or extends it past a '.'.
    std::string apply(const std::string& name) const;
};

struct AttackOutcome {
    AppBundle bundle;
    RewriteMap map;
    Family element = Family::kAndroid;  // the drawn f
    int level = 0;                      // L
    double ratio = 0.0;                 // P
};

// Mode-element selection policies.
std::vector<Family> select_elements_random(const std::vector<Family>& families,
                                           int k, std::uint64_t seed);
// argmax over known families of mean benign mass minus mean malicious mass,
// where mass(f) sums every feature with f as source or destination.
std::vector<Family> select_elements_train_stats(
    const std::vector<FeatureVector>& benign,
    const std::vector<FeatureVector>& malicious);
// argmin over known families of mean total mass on the (malicious-only)
// test features; ties broken by family index.
std::vector<Family> select_elements_blackhole(
    const std::vector<FeatureVector>& test_features);

struct CorpusStatistics {
    std::vector<FeatureVector> train_benign;
    std::vector<FeatureVector> train_malicious;
    std::vector<FeatureVector> test_malicious;
};

AttackConfig make_variant_config(AttackVariant variant,
                                 const CorpusStatistics& stats,
                                 std::uint64_t seed);

// Algorithm: draw L, P and f; create a root named after f; move ceil(P*n_L)
// of the level-L directories under it (re-rooted as f/<basename>); rewrite
// every occurrence of the moved prefixes in code units, manifest and
// layouts. A selection that rounds to zero directories is a no-op, not an
// error. The output always passes check_integrity.
AttackOutcome structure_break(const AppBundle& bundle, const AttackConfig& cfg);

// Deterministic core of structure_break: moves the named level-L directories
// (dotted paths, pre-attack snapshot) under a new/merged root named f.
AttackOutcome apply_structure_break(const AppBundle& bundle, Family f,
                                    const std::vector<std::string>& root_paths,
                                    int level, double ratio);

// Replaces every occurrence of prefix `r` at a qualified-name token boundary
// (preceded by start or a non-name character, followed by '.', '-',
// whitespace, or end) with `r_new`. All other text is byte-identical.
std::string rewrite_occurrences(const std::string& line, const std::string& r,
                                const std::string& r_new);
std::vector<std::string> change_occurrences(const std::vector<std::string>& lines,
                                            const std::string& r,
                                            const std::string& r_new);

// Stand-in permission-space adversary: edits a malicious bundle's permission
// set toward the benign modal profile (drop permissions outside the profile,
// add missing ones) up to `budget` single-permission edits. The code tree is
// never touched.
AppBundle permission_perturb(const AppBundle& bundle,
                             const std::vector<std::string>& benign_profile,
                             int budget, std::uint64_t seed);

// Per-app attack report CSV row(s): variant, f, L, P and the rewrite map.
std::string attack_report_csv(const std::string& app_id,
                              const AttackOutcome& outcome,
                              AttackVariant variant);

}  // namespace droidmark
